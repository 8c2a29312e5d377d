//! Functionally continuous Runge-Kutta (FCRK) integration of
//! `X'(t) = F(X(t), ∫₀^∞ X(t - s) g(s) ds)` with a gamma kernel `g`.
//!
//! Every step carries a continuous interpolant `ηⁿ(hθ) = xⁿ + h Σ bᵢ(θ) Kᵢ`.
//! Stage `i` is evaluated at `tₙ + cᵢh`; its convolution reads the history,
//! the interpolants of completed steps and, for lags that fall inside the
//! current step, the partial stage polynomial `xⁿ + h Σ_{j<i} A_ij(θ) K_j`.

use std::fmt;
use std::sync::Arc;

use crate::chain::HistoryFunction;
use crate::distributions::GammaKernel;
use crate::error::{domain, invalid, Error, Result};
use crate::quadrature::{KernelTransform, Node, QuadConfig};

/// Polynomial in `θ` without constant term: `p[0] θ + p[1] θ² + p[2] θ³`.
pub type ThetaPoly = [f64; 3];

fn eval_poly(p: &ThetaPoly, theta: f64) -> f64 {
    theta * (p[0] + theta * (p[1] + theta * p[2]))
}

/// Continuous Butcher tableau with polynomial weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FcrkTableau {
    pub c: Vec<f64>,
    /// Lower triangular, `a[i][j]` for `j < i`.
    pub a: Vec<Vec<ThetaPoly>>,
    pub b: Vec<ThetaPoly>,
}

impl FcrkTableau {
    /// The six stage, fourth order tableau.
    pub fn fourth_order() -> Self {
        let zero = [0.0; 3];
        let half_sq = [1.0, -0.5, 0.0];
        let sq = [0.0, 0.5, 0.0];
        let w1 = [1.0, -1.5, 2.0 / 3.0];
        let w5 = [0.0, 2.0, -4.0 / 3.0];
        let w6 = [0.0, -0.5, 2.0 / 3.0];
        Self {
            c: vec![0.0, 1.0, 0.5, 1.0, 0.5, 1.0],
            a: vec![
                vec![],
                vec![[1.0, 0.0, 0.0]],
                vec![half_sq, sq],
                vec![half_sq, sq, zero],
                vec![w1, zero, w5, w6],
                vec![w1, zero, w5, w6, zero],
            ],
            b: vec![w1, zero, zero, zero, w5, w6],
        }
    }

    pub fn stages(&self) -> usize {
        self.c.len()
    }

    pub fn a_at(&self, i: usize, j: usize, theta: f64) -> f64 {
        eval_poly(&self.a[i][j], theta)
    }

    pub fn b_at(&self, i: usize, theta: f64) -> f64 {
        eval_poly(&self.b[i], theta)
    }
}

/// State dimension aware right-hand side `F(x, I, out)`.
pub type VectorRhs = Arc<dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync>;
/// History `ψ(s, out)` for `s ≤ t₀`.
pub type VectorHistory = Arc<dyn Fn(f64, &mut [f64]) + Send + Sync>;

#[derive(Clone)]
pub struct DdeProblem {
    pub dim: usize,
    pub rhs: VectorRhs,
    pub kernel: GammaKernel,
    pub history: VectorHistory,
    pub t0: f64,
    pub t_end: f64,
}

impl fmt::Debug for DdeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DdeProblem")
            .field("dim", &self.dim)
            .field("kernel", &self.kernel)
            .field("t0", &self.t0)
            .field("t_end", &self.t_end)
            .finish()
    }
}

impl DdeProblem {
    pub fn new(
        dim: usize,
        rhs: VectorRhs,
        kernel: GammaKernel,
        history: VectorHistory,
        t0: f64,
        t_end: f64,
    ) -> Result<Self> {
        if dim == 0 {
            return invalid("state dimension must be positive");
        }
        if !(t_end > t0) || !t0.is_finite() || !t_end.is_finite() {
            return invalid(format!("need finite t0 < T (got {t0}, {t_end})"));
        }
        Ok(Self { dim, rhs, kernel, history, t0, t_end })
    }

    /// Scalar problem `X' = F(X, I)` with a scalar history.
    pub fn scalar<F>(rhs: F, kernel: GammaKernel, history: HistoryFunction, t0: f64, t_end: f64) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(
            1,
            Arc::new(move |x, i, out| out[0] = rhs(x[0], i[0])),
            kernel,
            Arc::new(move |s, out| out[0] = history.eval(s)),
            t0,
            t_end,
        )
    }
}

/// Mesh values, stage derivatives and the continuous extension of an FCRK solve.
#[derive(Clone)]
pub struct Solution {
    dim: usize,
    t0: f64,
    h: f64,
    tableau: FcrkTableau,
    history: VectorHistory,
    /// `xⁿ`, flattened `(steps + 1) × dim`.
    xs: Vec<f64>,
    /// `K_{n,i}`, flattened `steps × stages × dim`.
    ks: Vec<f64>,
}

impl fmt::Debug for Solution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Solution")
            .field("dim", &self.dim)
            .field("t0", &self.t0)
            .field("h", &self.h)
            .field("steps", &self.steps())
            .finish()
    }
}

impl Solution {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn steps(&self) -> usize {
        self.xs.len() / self.dim - 1
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.mesh_time(self.steps())
    }

    pub fn mesh_time(&self, n: usize) -> f64 {
        self.t0 + n as f64 * self.h
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps()).map(|n| self.mesh_time(n)).collect()
    }

    /// `xⁿ`.
    pub fn mesh_value(&self, n: usize) -> &[f64] {
        &self.xs[n * self.dim..(n + 1) * self.dim]
    }

    /// First component at every mesh point.
    pub fn mesh_component(&self, d: usize) -> Vec<f64> {
        (0..=self.steps()).map(|n| self.mesh_value(n)[d]).collect()
    }

    pub fn stage_derivative(&self, n: usize, i: usize) -> &[f64] {
        let s = self.tableau.stages();
        &self.ks[(n * s + i) * self.dim..(n * s + i + 1) * self.dim]
    }

    fn eta_into(&self, n: usize, theta: f64, out: &mut [f64]) {
        out.copy_from_slice(self.mesh_value(n));
        for i in 0..self.tableau.stages() {
            let w = self.h * self.tableau.b_at(i, theta);
            if w != 0.0 {
                for (o, k) in out.iter_mut().zip(self.stage_derivative(n, i)) {
                    *o += w * k;
                }
            }
        }
    }

    /// `X(t)` for any `t ≤ T`: the history before `t₀`, the step interpolant after.
    pub fn query_into(&self, t: f64, out: &mut [f64]) -> Result<()> {
        let t_end = self.t_end();
        if t > t_end + 1e-12 * self.h {
            return domain(format!("solution queried at t = {t} beyond T = {t_end}"));
        }
        if t <= self.t0 {
            (self.history)(t, out);
            return Ok(());
        }
        let steps = self.steps();
        let n = (((t - self.t0) / self.h).floor() as usize).min(steps - 1);
        let theta = (t - self.mesh_time(n)) / self.h;
        if theta >= 1.0 {
            out.copy_from_slice(self.mesh_value(n + 1));
        } else {
            self.eta_into(n, theta, out);
        }
        Ok(())
    }

    pub fn query(&self, t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.query_into(t, &mut out)?;
        Ok(out)
    }

    /// First component of [`Solution::query`].
    pub fn query_scalar(&self, t: f64) -> Result<f64> {
        Ok(self.query(t)?[0])
    }
}

/// Moves `x` off a mesh point `t₀ + m h` by `delta`, into the piece it already lies in.
fn jitter(x: f64, t0: f64, h: f64, delta: f64) -> f64 {
    if delta <= 0.0 || x <= t0 {
        return x;
    }
    let m = ((x - t0) / h).round();
    let mesh = t0 + m * h;
    let d = x - mesh;
    if d.abs() >= delta || m == 0.0 {
        x
    } else if d >= 0.0 {
        mesh + delta
    } else {
        mesh - delta
    }
}

/// Solves `problem` with the fourth order FCRK method on a uniform mesh.
///
/// `h` is shrunk, if necessary, so that an integer number of steps reaches `T`.
pub fn fcrk4_solve(problem: &DdeProblem, h: f64, quad: &QuadConfig) -> Result<Solution> {
    fcrk_solve_with(problem, h, quad, &FcrkTableau::fourth_order())
}

pub fn fcrk_solve_with(problem: &DdeProblem, h: f64, quad: &QuadConfig, tableau: &FcrkTableau) -> Result<Solution> {
    if !(h > 0.0 && h.is_finite()) {
        return invalid(format!("step size must be positive (got {h})"));
    }
    if quad.panels == 0 {
        return invalid("quadrature needs at least one panel");
    }
    let span = problem.t_end - problem.t0;
    let steps = ((span / h - 1e-9).ceil() as usize).max(1);
    let h = span / steps as f64;
    let dim = problem.dim;
    let stages = tableau.stages();
    let transform = KernelTransform::new(problem.kernel);
    let t0 = problem.t0;

    let mut xs = Vec::with_capacity((steps + 1) * dim);
    let mut x0 = vec![0.0; dim];
    (problem.history)(t0, &mut x0);
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { step: 0, t: t0 });
    }
    xs.extend_from_slice(&x0);

    let mut sol = Solution {
        dim,
        t0,
        h,
        tableau: tableau.clone(),
        history: problem.history.clone(),
        xs,
        ks: Vec::with_capacity(steps * stages * dim),
    };

    let mut stage_k = vec![0.0; stages * dim];
    let mut y_stage = vec![0.0; dim];
    let mut conv = vec![0.0; dim];
    let mut buf = vec![0.0; dim];
    let mut deriv = vec![0.0; dim];
    let mut nodes: Vec<Node> = Vec::new();

    for n in 0..steps {
        let tn = t0 + n as f64 * h;
        let xn = sol.mesh_value(n).to_vec();
        for i in 0..stages {
            let ci = tableau.c[i];
            let t_stage = tn + ci * h;
            // partial stage polynomial at θ
            let partial = |theta: f64, out: &mut [f64], ks: &[f64]| {
                out.copy_from_slice(&xn);
                for j in 0..i {
                    let w = h * tableau.a_at(i, j, theta);
                    if w != 0.0 {
                        for (o, k) in out.iter_mut().zip(&ks[j * dim..(j + 1) * dim]) {
                            *o += w * k;
                        }
                    }
                }
            };

            nodes.clear();
            nodes.extend(transform.nodes(t_stage - t0, quad.panels));
            conv.iter_mut().for_each(|c| *c = 0.0);
            for node in &nodes {
                let x = jitter(t_stage - node.lag, t0, h, quad.jitter);
                if x <= t0 {
                    (problem.history)(x, &mut buf);
                } else if x > tn {
                    partial((x - tn) / h, &mut buf, &stage_k);
                } else {
                    let m = (((x - t0) / h).floor() as usize).min(n.saturating_sub(1));
                    let theta = (x - (t0 + m as f64 * h)) / h;
                    sol.eta_into(m, theta.min(1.0), &mut buf);
                }
                for (c, v) in conv.iter_mut().zip(&buf) {
                    *c += node.weight * v;
                }
            }

            partial(ci, &mut y_stage, &stage_k);
            (problem.rhs)(&y_stage, &conv, &mut deriv);
            if deriv.iter().chain(conv.iter()).any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { step: n, t: t_stage });
            }
            stage_k[i * dim..(i + 1) * dim].copy_from_slice(&deriv);
        }
        sol.ks.extend_from_slice(&stage_k);
        let mut next = vec![0.0; dim];
        sol.eta_into(n, 1.0, &mut next);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: n + 1, t: tn + h });
        }
        sol.xs.extend_from_slice(&next);
    }
    Ok(sol)
}
