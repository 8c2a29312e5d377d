//! Reduction of an Erlang or hypoexponential distributed DDE to an ODE system.
//!
//! With stage rates `r₁, …, r_n` the delayed term `∫ Y(t - s) f(s) ds` equals
//! `r_n B_n(t)` where
//!
//! ```text
//! B₁' = Y - r₁ B₁,    Bᵢ' = r_{i-1} B_{i-1} - rᵢ Bᵢ,    Y' = F(Y, r_n B_n).
//! ```
//!
//! The Erlang chain (all rates `b`) and the hypoexponential chain
//! (`λ, …, λ, ν, μ`) share this code path.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::approximations::{ChainParams, Variant};
use crate::error::{invalid, Error, Result};
use crate::ode::{integrate, rk45_adaptive, OdeConfig, Tolerances, Trajectory};

/// Right-hand side `F(x, conv)` of a scalar distributed delay equation.
pub type ScalarRhs = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Initial history `ψ(s)` for `s ≤ t₀`.
#[derive(Clone)]
pub enum HistoryFunction {
    Constant(f64),
    /// `ψ(s) = c e^{ρ s}`.
    Exponential {
        c: f64,
        rho: f64,
    },
    /// Zero history with an impulse of the given mass entering the first stage at `t₀`.
    PointMass(f64),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for HistoryFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HistoryFunction::Constant(c) => write!(f, "Constant({c})"),
            HistoryFunction::Exponential { c, rho } => write!(f, "Exponential {{ c: {c}, rho: {rho} }}"),
            HistoryFunction::PointMass(m) => write!(f, "PointMass({m})"),
            HistoryFunction::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl HistoryFunction {
    pub fn custom<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        HistoryFunction::Custom(Arc::new(f))
    }

    /// `ψ(s)`.  A point mass contributes nothing to the state trajectory itself.
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            HistoryFunction::Constant(c) => *c,
            HistoryFunction::Exponential { c, rho } => c * (rho * s).exp(),
            HistoryFunction::PointMass(_) => 0.0,
            HistoryFunction::Custom(f) => f(s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Erlang kernels for the common stages, single exponentials `E_ν`, `E_μ` for the last two.
    #[default]
    PaperLiteral,
    /// The cumulative kernel of the first `i` stages for every `Bᵢ`, i.e. the
    /// state the chain would have reached if driven by `ψ` since `-∞`.
    KernelConsistent,
}

impl InitMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "paper_literal" | "literal" => Ok(InitMode::PaperLiteral),
            "kernel_consistent" | "consistent" => Ok(InitMode::KernelConsistent),
            other => invalid(format!("unknown init mode '{other}'")),
        }
    }
}

#[derive(Clone)]
pub struct ChainOdeProblem {
    pub rhs: ScalarRhs,
    pub params: ChainParams,
    pub history: HistoryFunction,
    pub t0: f64,
    pub t_end: f64,
    pub init_mode: InitMode,
    /// `(Y(t₀), B₁(t₀), …, B_n(t₀))`.
    pub initial: Vec<f64>,
    rates: Vec<f64>,
}

impl fmt::Debug for ChainOdeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChainOdeProblem")
            .field("params", &self.params)
            .field("history", &self.history)
            .field("t0", &self.t0)
            .field("t_end", &self.t_end)
            .field("init_mode", &self.init_mode)
            .field("initial", &self.initial)
            .finish()
    }
}

pub fn build_erlang_system(
    rhs: ScalarRhs,
    params: ChainParams,
    history: HistoryFunction,
    t0: f64,
    t_end: f64,
) -> Result<ChainOdeProblem> {
    if params.variant != Variant::Erlang {
        return invalid("build_erlang_system needs Erlang chain parameters");
    }
    ChainOdeProblem::build(rhs, params, history, t0, t_end, InitMode::KernelConsistent)
}

pub fn build_hypoexp_system(
    rhs: ScalarRhs,
    params: ChainParams,
    history: HistoryFunction,
    t0: f64,
    t_end: f64,
    init_mode: InitMode,
) -> Result<ChainOdeProblem> {
    if params.variant == Variant::Erlang {
        return invalid("build_hypoexp_system needs hypoexponential chain parameters");
    }
    ChainOdeProblem::build(rhs, params, history, t0, t_end, init_mode)
}

/// `r_n B_n`, the chain's approximation of the delayed term.
pub fn delayed_term(problem: &ChainOdeProblem, state: &[f64]) -> f64 {
    problem.params.delayed_rate() * state[state.len() - 1]
}

impl ChainOdeProblem {
    /// Builds the system for any variant; the Erlang chain ignores `init_mode`.
    pub fn build(
        rhs: ScalarRhs,
        params: ChainParams,
        history: HistoryFunction,
        t0: f64,
        t_end: f64,
        init_mode: InitMode,
    ) -> Result<Self> {
        if !(t_end >= t0) || !t0.is_finite() || !t_end.is_finite() {
            return invalid(format!("need finite t0 ≤ T (got {t0}, {t_end})"));
        }
        let rates = params.rates();
        let literal = init_mode == InitMode::PaperLiteral && params.variant != Variant::Erlang;
        let mut initial = Vec::with_capacity(rates.len() + 1);
        initial.push(history.eval(t0));
        initial.extend(initial_chain(&history, &rates, t0, literal)?);
        Ok(Self { rhs, params, history, t0, t_end, init_mode, initial, rates })
    }

    pub fn dimension(&self) -> usize {
        self.rates.len() + 1
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn delayed_term(&self, state: &[f64]) -> f64 {
        delayed_term(self, state)
    }

    /// Evaluates the chain vector field.
    pub fn eval_rhs(&self, state: &[f64], out: &mut [f64]) {
        let rates = &self.rates;
        let n = rates.len();
        let y = state[0];
        out[0] = (self.rhs)(y, rates[n - 1] * state[n]);
        out[1] = y - rates[0] * state[1];
        for i in 1..n {
            out[i + 1] = rates[i - 1] * state[i] - rates[i] * state[i + 1];
        }
    }

    /// Integrates the system and returns the full state at `output_times`.
    pub fn solve(&self, output_times: &[f64], cfg: &OdeConfig) -> Result<Trajectory> {
        integrate(|_, y, dy| self.eval_rhs(y, dy), &self.initial, self.t0, output_times, cfg)
    }

    /// `(t, Y(t))` on the mesh `t₀ + k h` up to `T`, integrated with `cfg`.
    pub fn solve_on_mesh(&self, h: f64, cfg: &OdeConfig) -> Result<(Vec<f64>, Vec<f64>)> {
        let steps = ((self.t_end - self.t0) / h).round() as usize;
        let times: Vec<f64> = (0..=steps).map(|k| self.t0 + k as f64 * h).collect();
        let traj = self.solve(&times, cfg)?;
        let x = traj.component(0);
        Ok((traj.times, x))
    }
}

/// Values `B₁(t₀), …, B_n(t₀)` for the given history.
///
/// `Bᵢ(t₀) = (1/rᵢ) ∫₀^∞ ψ(t₀ - s) kᵢ(s) ds`, with `kᵢ` the density of the
/// first `i` stages, or, when `literal`, the single exponentials `E_ν`, `E_μ`
/// for the last two stages.
pub fn initial_chain(history: &HistoryFunction, rates: &[f64], t0: f64, literal: bool) -> Result<Vec<f64>> {
    let n = rates.len();
    let kernel_of = |i: usize| -> &[f64] {
        if literal && n >= 2 && i >= n - 2 {
            &rates[i..=i]
        } else {
            &rates[..=i]
        }
    };
    match history {
        HistoryFunction::Constant(c) => Ok(rates.iter().map(|r| c / r).collect()),
        HistoryFunction::Exponential { c, rho } => (0..n)
            .map(|i| {
                let k = kernel_of(i);
                if let Some(r) = k.iter().find(|r| **r + rho <= 0.0) {
                    return Err(Error::DivergentHistory(format!(
                        "exponential history with ρ = {rho} is not integrable against a stage of rate {r}"
                    )));
                }
                let laplace: f64 = k.iter().map(|r| r / (r + rho)).product();
                Ok(c * (rho * t0).exp() * laplace / rates[i])
            })
            .collect(),
        HistoryFunction::PointMass(m) => {
            let mut b = vec![0.0; n];
            b[0] = *m;
            Ok(b)
        }
        HistoryFunction::Custom(f) => {
            let mut b = driven_chain(f.as_ref(), rates, t0)?;
            if literal && n >= 2 {
                for i in n - 2..n {
                    b[i] = driven_chain(f.as_ref(), &rates[i..=i], t0)?[0];
                }
            }
            Ok(b)
        }
    }
}

/// State at `t₀` of the chain `B₁' = ψ - r₁B₁, …` started empty far in the past,
/// doubling the window until the result settles.
fn driven_chain(psi: &(dyn Fn(f64) -> f64 + Send + Sync), rates: &[f64], t0: f64) -> Result<Vec<f64>> {
    let mean: f64 = rates.iter().map(|r| 1.0 / r).sum();
    let mut window = 20.0 * mean + 10.0;
    let mut tol = Tolerances::new(1e-12, 1e-14);
    tol.h_init = 0.1 / rates.iter().copied().fold(0.0, f64::max);
    let mut previous: Option<Vec<f64>> = None;
    for _ in 0..12 {
        let start = t0 - window;
        let traj = rk45_adaptive(
            |t, b: &[f64], db: &mut [f64]| {
                db[0] = psi(t) - rates[0] * b[0];
                for i in 1..b.len() {
                    db[i] = rates[i - 1] * b[i - 1] - rates[i] * b[i];
                }
            },
            &vec![0.0; rates.len()],
            start,
            &[t0],
            &tol,
            10_000_000,
        )
        .map_err(|e| Error::DivergentHistory(format!("history integral failed: {e}")))?;
        let current = traj.states.into_iter().next().unwrap();
        if current.iter().any(|v| !v.is_finite()) {
            return Err(Error::DivergentHistory("history integral is not finite".into()));
        }
        if let Some(prev) = &previous {
            let scale = current.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
            let change = prev.iter().zip(&current).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            if change <= 1e-10 * scale.max(1.0) {
                return Ok(current);
            }
        }
        previous = Some(current);
        window *= 2.0;
    }
    Err(Error::DivergentHistory("history integral does not settle as the window grows".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approximations::{erlang_approx, fixed_hypoexp, smoothed_hypoexp};
    use crate::quadrature::integrate_half_line;
    use crate::special::gamma_q;

    fn zero_rhs() -> ScalarRhs {
        Arc::new(|_, _| 0.0)
    }

    #[test]
    fn erlang_constant_history() {
        let p = erlang_approx(3.0, 1.0).unwrap();
        let prob = build_erlang_system(zero_rhs(), p, HistoryFunction::Constant(1.0), 0.0, 1.0).unwrap();
        assert_eq!(prob.dimension(), 4);
        for b in &prob.initial[1..] {
            assert!((b - 1.0 / 3.0).abs() < 1e-15);
        }
        let prob = build_erlang_system(zero_rhs(), p, HistoryFunction::Constant(0.0), 0.0, 1.0).unwrap();
        assert!(prob.initial.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn exponential_history_matches_quadrature() {
        let psi = |s: f64| 0.1 * (0.1 * s).exp();
        let p = erlang_approx(4.0, 4.0 / 3.0).unwrap();
        let b = initial_chain(&HistoryFunction::Exponential { c: 0.1, rho: 0.1 }, &p.rates(), 0.0, false).unwrap();
        let lam = 3.0f64;
        for (i, v) in b.iter().enumerate() {
            let k = (i + 1) as i32;
            assert!((v - 0.1 / lam * (lam / 3.1).powi(k)).abs() < 1e-15);
            // oracle: the defining integral with the Erlang density
            let erlang = crate::distributions::GammaKernel::new(k as f64, lam).unwrap();
            let q = integrate_half_line(|s| psi(-s) * erlang.pdf(s).unwrap() / lam, 1e-14);
            assert!((v - q).abs() < 1e-11, "stage {k}: {v} vs {q}");
        }
        let custom = initial_chain(&HistoryFunction::custom(psi), &p.rates(), 0.0, false).unwrap();
        for (a, c) in b.iter().zip(&custom) {
            assert!((a - c).abs() < 1e-9);
        }
    }

    #[test]
    fn hypoexp_constant_history_modes_agree() {
        let p = fixed_hypoexp(3.4, 1.0).unwrap();
        for mode in [InitMode::PaperLiteral, InitMode::KernelConsistent] {
            let prob = build_hypoexp_system(zero_rhs(), p, HistoryFunction::Constant(2.0), 0.0, 1.0, mode).unwrap();
            let n = p.n;
            assert!((prob.initial[n - 1] - 2.0 / p.nu).abs() < 1e-15);
            assert!((prob.initial[n] - 2.0 / p.mu).abs() < 1e-15);
            assert!((prob.initial[1] - 2.0 / p.common_rate).abs() < 1e-15);
        }
    }

    #[test]
    fn literal_and_consistent_kernels_differ_for_exponential_history() {
        let p = fixed_hypoexp(3.4, 1.0).unwrap();
        let h = HistoryFunction::Exponential { c: 1.0, rho: 0.5 };
        let lit = initial_chain(&h, &p.rates(), 0.0, true).unwrap();
        let con = initial_chain(&h, &p.rates(), 0.0, false).unwrap();
        assert_eq!(lit[..2], con[..2]);
        assert!((lit[3] - 1.0 / (p.mu + 0.5)).abs() < 1e-15);
        assert!((lit[3] - con[3]).abs() > 1e-3);
        let custom = initial_chain(&HistoryFunction::custom(|s| (0.5 * s).exp()), &p.rates(), 0.0, true).unwrap();
        for (a, c) in lit.iter().zip(&custom) {
            assert!((a - c).abs() < 1e-9);
        }
    }

    #[test]
    fn divergent_history_is_reported() {
        let p = erlang_approx(2.0, 1.0).unwrap();
        let h = HistoryFunction::Exponential { c: 1.0, rho: -3.0 };
        assert!(matches!(initial_chain(&h, &p.rates(), 0.0, false), Err(Error::DivergentHistory(_))));
        let h = HistoryFunction::custom(|s| (-3.0 * s).exp());
        assert!(matches!(initial_chain(&h, &p.rates(), 0.0, false), Err(Error::DivergentHistory(_))));
    }

    #[test]
    fn delayed_term_examples() {
        let p = fixed_hypoexp(2.5, 1.0).unwrap();
        let mut prob =
            build_hypoexp_system(zero_rhs(), p, HistoryFunction::Constant(0.0), 0.0, 1.0, InitMode::default()).unwrap();
        prob.params.mu = 5.0;
        assert!((delayed_term(&prob, &[0.0, 0.0, 0.0, 0.2]) - 1.0).abs() < 1e-15);
        let e =
            build_erlang_system(zero_rhs(), erlang_approx(3.0, 1.0).unwrap(), HistoryFunction::Constant(1.0), 0.0, 1.0)
                .unwrap();
        assert!((delayed_term(&e, &e.initial) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_input_reaches_steady_state() {
        let p = smoothed_hypoexp(3.3, 2.0).unwrap();
        let prob = build_hypoexp_system(zero_rhs(), p, HistoryFunction::Constant(0.0), 0.0, 60.0, InitMode::default())
            .unwrap();
        let mut y0 = prob.initial.clone();
        y0[0] = 1.7;
        let traj =
            rk45_adaptive(|_, y, dy| prob.eval_rhs(y, dy), &y0, 0.0, &[60.0], &Tolerances::uniform(1e-12), 1_000_000)
                .unwrap();
        assert!((prob.delayed_term(&traj.states[0]) - 1.7).abs() < 1e-9);
    }

    #[test]
    fn integer_shape_hypoexp_and_erlang_trajectories_match() {
        let rhs: ScalarRhs = Arc::new(|x, c| 0.8 * x - 1.1 * c);
        let times: Vec<f64> = (0..=100).map(|k| k as f64 * 0.1).collect();
        let cfg = OdeConfig::adaptive(Tolerances::uniform(1e-12));
        for j in [2.0, 3.0, 5.0] {
            let e = build_erlang_system(
                rhs.clone(),
                erlang_approx(j, 1.0).unwrap(),
                HistoryFunction::Constant(1.0),
                0.0,
                10.0,
            )
            .unwrap();
            let h = build_hypoexp_system(
                rhs.clone(),
                fixed_hypoexp(j, 1.0).unwrap(),
                HistoryFunction::Constant(1.0),
                0.0,
                10.0,
                InitMode::default(),
            )
            .unwrap();
            let a = e.solve(&times, &cfg).unwrap().component(0);
            let b = h.solve(&times, &cfg).unwrap().component(0);
            let diff = a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(diff < 1e-10, "j = {j}: {diff}");
        }
    }

    #[test]
    fn impulse_reproduces_kernel() {
        let p = fixed_hypoexp(3.6, 1.5).unwrap();
        let prob = build_hypoexp_system(zero_rhs(), p, HistoryFunction::PointMass(1.0), 0.0, 6.0, InitMode::default())
            .unwrap();
        let kernel = p.kernel();
        let times = [0.3, 1.0, 2.0, 4.0];
        let traj = prob.solve(&times, &OdeConfig::adaptive(Tolerances::uniform(1e-12))).unwrap();
        for (t, s) in times.iter().zip(&traj.states) {
            let pdf = kernel.pdf(*t).unwrap();
            // pdf as the negative derivative of the survival function
            let d = 1e-4;
            let fd = -(kernel.survival(t + d).unwrap() - kernel.survival(t - d).unwrap()) / (2.0 * d);
            assert!((prob.delayed_term(s) - pdf).abs() < 1e-9);
            assert!((prob.delayed_term(s) - fd).abs() < 1e-6);
        }
    }

    #[test]
    fn transit_mass_is_conserved() {
        let p = erlang_approx(4.0, 2.0).unwrap();
        let prob = build_erlang_system(zero_rhs(), p, HistoryFunction::PointMass(1.0), 0.0, 8.0).unwrap();
        let times: Vec<f64> = (1..=16).map(|k| k as f64 * 0.5).collect();
        let traj = prob.solve(&times, &OdeConfig::adaptive(Tolerances::uniform(1e-13))).unwrap();
        for (t, s) in times.iter().zip(&traj.states) {
            let in_transit: f64 = s[1..].iter().sum();
            let absorbed = 1.0 - gamma_q(4.0, 2.0 * t);
            assert!((in_transit + absorbed - 1.0).abs() < 1e-10, "t = {t}");
        }
    }
}
