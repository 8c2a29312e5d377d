//! Kernel replacement error measured through moment generating functions.
//!
//! For an exponential mode `e^{-φt}` the delayed term picks up the factor
//! `M(-φ)`, so `|M_X(-φ) - M_Y(-φ)|` is the per-mode error of replacing the
//! gamma kernel `X` with the approximation `Y`.

use crate::approximations::{approximate, ApproxConfig, ChainParams, Variant};
use crate::error::Result;

use super::convergence::estimate_order;

/// `|M_X(-φ) - M_Y(-φ)|` for `X ~ Gamma(j, j/τ)` and the chain `params`.
///
/// Both MGFs are formed in log space so that tiny differences survive.
pub fn mgf_error(params: &ChainParams, phi: f64) -> f64 {
    let a = params.j / params.tau;
    let rates = params.rates();
    if rates.len() as f64 == params.j && rates.iter().all(|&r| r == a) {
        return 0.0;
    }
    let log_x = -params.j * (phi / a).ln_1p();
    let log_y: f64 = -rates.iter().map(|r| (phi / r).ln_1p()).sum::<f64>();
    (log_x.exp() * (log_y - log_x).exp_m1()).abs()
}

/// `φ/a` sample points: 10 values log-spaced over `[1e-3, 1e-1]`.
pub fn phi_grid() -> Vec<f64> {
    (0..10).map(|k| 10f64.powf(-3.0 + 2.0 * k as f64 / 9.0)).collect()
}

/// Slope of `log |ΔM|` against `log(φ/a)`; `None` when the error vanishes identically.
pub fn mgf_error_order(j: f64, tau: f64, variant: Variant) -> Result<Option<f64>> {
    let params = approximate(variant, j, tau, &ApproxConfig::default())?;
    let a = j / tau;
    let points: Vec<(f64, f64)> = phi_grid().into_iter().map(|x| (x, mgf_error(&params, x * a))).collect();
    if points.iter().all(|p| p.1 == 0.0) {
        return Ok(None);
    }
    Ok(Some(estimate_order(&points)?.slope))
}
