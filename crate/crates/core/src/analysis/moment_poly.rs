//! Polynomials governing moment matching beyond two moments.
//!
//! `f_m(x) = Σ_{k=0}^m (-1)^k x^{m-k} (m-1+{j})_k / k!` with the falling
//! Pochhammer symbol `(z)_k`, and `g_m(x) = x^m f_m(1/x)`.  The real roots of
//! `f_m` are the candidate normalized stage means; `f_m` never has more than
//! two of them, so at most two free rates can be matched.

use nalgebra::{linalg::Schur, Complex, DMatrix};
use serde::Serialize;

use crate::error::{invalid, Error, Result};

pub const DEFAULT_IMAG_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentPolynomial {
    pub m: usize,
    pub fj: f64,
    /// `cₖ = (-1)^k (m-1+{j})_k / k!`: the coefficient of `x^{m-k}` in `f_m`
    /// and of `x^k` in `g_m`.
    pub coeffs: Vec<f64>,
}

pub fn fm_polynomial(m: usize, fj: f64) -> Result<MomentPolynomial> {
    if m == 0 {
        return invalid("moment polynomial degree must be at least 1");
    }
    if !(fj > 0.0 && fj < 1.0) {
        return invalid(format!("fractional part must lie in (0, 1) (got {fj})"));
    }
    let mut coeffs = Vec::with_capacity(m + 1);
    let mut poch = 1.0;
    for k in 0..=m {
        if k > 0 {
            // (z)_k = (z)_{k-1} (z - k + 1), z = m - 1 + {j}
            poch *= (m - k) as f64 + fj;
            poch /= k as f64;
        }
        coeffs.push(if k % 2 == 0 { poch } else { -poch });
    }
    Ok(MomentPolynomial { m, fj, coeffs })
}

impl MomentPolynomial {
    pub fn eval_f(&self, x: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn eval_g(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// Roots of `f_m` as eigenvalues of its companion matrix.
    pub fn roots(&self) -> Result<Vec<Complex<f64>>> {
        let m = self.m;
        let mut comp = DMatrix::zeros(m, m);
        for k in 0..m {
            comp[(0, k)] = -self.coeffs[k + 1];
        }
        for k in 1..m {
            comp[(k, k - 1)] = 1.0;
        }
        let schur = Schur::try_new(comp, 1e-15, 100_000).ok_or(Error::EigenNoConvergence)?;
        Ok(schur.complex_eigenvalues().iter().copied().collect())
    }

    /// Real roots, counted with `|Im| < imag_tol (1 + |Re|)`.
    pub fn real_roots(&self, imag_tol: f64) -> Result<Vec<f64>> {
        let mut r: Vec<f64> =
            self.roots()?.into_iter().filter(|z| z.im.abs() < imag_tol * (1.0 + z.re.abs())).map(|z| z.re).collect();
        r.sort_by(f64::total_cmp);
        Ok(r)
    }

    pub fn real_root_count(&self, imag_tol: f64) -> Result<usize> {
        Ok(self.real_roots(imag_tol)?.len())
    }
}

/// Outcome of the `g_m` identities for one `(m, {j})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GmCheckReport {
    pub m: usize,
    pub fj: f64,
    pub g_at_zero_is_one: bool,
    /// `g_m(1) < 0` for even `m`, `> 0` for odd `m`.
    pub sign_at_one: bool,
    /// `g_m' = -(m-1+{j}) g_{m-1}` against central differences at 20 points.
    pub derivative_recurrence: bool,
    /// Odd `m`: `g_m(x) > (1-x)^m` on `(0, 1)`.
    pub odd_lower_bound: Option<bool>,
    /// Even `m`: exactly one root of `g_m` in `[0, 1]`.
    pub even_single_root: Option<bool>,
}

impl GmCheckReport {
    pub fn passed(&self) -> bool {
        self.g_at_zero_is_one
            && self.sign_at_one
            && self.derivative_recurrence
            && self.odd_lower_bound.unwrap_or(true)
            && self.even_single_root.unwrap_or(true)
    }
}

pub fn gm_checks(m: usize, fj: f64) -> Result<GmCheckReport> {
    let p = fm_polynomial(m, fj)?;
    let g1 = p.eval_g(1.0);
    let sign_at_one = if m.is_multiple_of(2) { g1 < 0.0 } else { g1 > 0.0 };

    let derivative_recurrence = if m == 1 {
        // g₀ ≡ 1
        let d = 1e-6;
        (0..20).all(|k| {
            let x = 0.05 * k as f64 + 0.01;
            let fd = (p.eval_g(x + d) - p.eval_g(x - d)) / (2.0 * d);
            (fd + fj).abs() <= 1e-6 * fj
        })
    } else {
        let q = fm_polynomial(m - 1, fj)?;
        let z = (m - 1) as f64 + fj;
        let d = 1e-5;
        (0..20).all(|k| {
            let x = 0.05 * k as f64 + 0.01;
            let fd = (p.eval_g(x + d) - p.eval_g(x - d)) / (2.0 * d);
            let want = -z * q.eval_g(x);
            (fd - want).abs() <= 1e-6 * want.abs().max(1e-3)
        })
    };

    let grid: Vec<f64> = (1..2000).map(|k| k as f64 / 2000.0).collect();
    let odd_lower_bound = (m % 2 == 1).then(|| grid.iter().all(|&x| p.eval_g(x) > (1.0 - x).powi(m as i32)));
    let even_single_root = if m.is_multiple_of(2) {
        let mut xs = vec![0.0];
        xs.extend(&grid);
        xs.push(1.0);
        let changes = xs.windows(2).filter(|w| p.eval_g(w[0]).signum() != p.eval_g(w[1]).signum()).count();
        // g_m roots are reciprocals of f_m roots, so a root in [0, 1] is an f_m root ≥ 1
        let big = p.real_roots(DEFAULT_IMAG_TOL)?.iter().filter(|&&r| r >= 1.0).count();
        Some(changes == 1 && big == 1)
    } else {
        None
    };

    Ok(GmCheckReport {
        m,
        fj,
        g_at_zero_is_one: p.eval_g(0.0) == 1.0,
        sign_at_one,
        derivative_recurrence,
        odd_lower_bound,
        even_single_root,
    })
}
