//! Survival functions of the gamma kernel and its two hypoexponential approximations.

use crate::approximations::{fixed_hypoexp, smoothed_hypoexp};
use crate::distributions::GammaKernel;
use crate::error::Result;

/// `(u, y_fixed, y_smoothed)`: gamma, fixed and smoothed survival at `t`.
pub fn survival_compare(j: f64, tau: f64, t: f64) -> Result<(f64, f64, f64)> {
    let u = GammaKernel::with_mean(j, tau)?.survival(t)?;
    let yf = fixed_hypoexp(j, tau)?.survival(t)?;
    let ys = smoothed_hypoexp(j, tau)?.survival(t)?;
    Ok((u, yf, ys))
}

/// `(|y_f(j₀+δ) - y_f(j₀-δ)|, |y_s(j₀+δ) - y_s(j₀-δ)|)` at a fixed `t`.
pub fn integer_jump(j0: f64, tau: f64, t: f64, delta: f64) -> Result<(f64, f64)> {
    let (_, f_hi, s_hi) = survival_compare(j0 + delta, tau, t)?;
    let (_, f_lo, s_lo) = survival_compare(j0 - delta, tau, t)?;
    Ok(((f_hi - f_lo).abs(), (s_hi - s_lo).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starts_at_one() {
        assert_eq!(survival_compare(2.3, 1.0, 0.0).unwrap(), (1.0, 1.0, 1.0));
    }

    #[test]
    fn exact_at_integer_shape() {
        for &t in &[0.3, 1.0, 2.0, 4.0] {
            let (u, f, s) = survival_compare(3.0, 1.0, t).unwrap();
            assert!((u - f).abs() < 1e-8 && (u - s).abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn smoothed_jump_is_not_larger() {
        let (jf, js) = integer_jump(3.0, 1.0, 4.0, 1e-6).unwrap();
        assert!(js <= jf, "{js} > {jf}");
        assert!(jf > 1e-6);
    }

    #[test]
    fn approximations_track_the_gamma_survival() {
        for &t in &[0.5, 1.0, 2.0] {
            let (u, f, s) = survival_compare(2.1, 1.0, t).unwrap();
            assert!((u - f).abs() < 2e-2 && (u - s).abs() < 2e-2);
        }
    }
}
