//! Reference solutions of the benchmark problems at integer shape, where the
//! gamma kernel is an Erlang kernel and the linear chain is exact.

use crate::approximations::erlang_approx;
use crate::chain::{HistoryFunction, InitMode};
use crate::error::{invalid, Result};
use crate::ode::{OdeConfig, Tolerances};
use crate::problems::{linear_chain, logistic_chain, LOGISTIC_TAU};

/// Coefficient of the sine term in the `j = 1` closed form, fixed by `x'(0) = -0.3`.
pub fn linear_j1_sine_coefficient() -> f64 {
    -2.0 / 29f64.sqrt()
}

/// `e^{-t/10}(cos(√29 t/10) + B sin(√29 t/10))`, the `j = 1`, `τ = 1`, `ψ ≡ 1` solution.
pub fn linear_j1_closed_form(t: f64) -> f64 {
    let w = 29f64.sqrt() / 10.0;
    (-t / 10.0).exp() * ((w * t).cos() + linear_j1_sine_coefficient() * (w * t).sin())
}

fn integer_shape(j: f64) -> Result<()> {
    if !(j >= 1.0 && j.fract() == 0.0) {
        return invalid(format!("reference solutions need a positive integer shape (got {j})"));
    }
    Ok(())
}

fn chain_tolerance() -> OdeConfig {
    let mut cfg = OdeConfig::adaptive(Tolerances::uniform(1e-12));
    cfg.max_steps = 50_000_000;
    cfg
}

/// Linear problem, `τ = 1`, `ψ ≡ 1`: closed form at `j = 1`, tight RK45 on the chain otherwise.
pub fn linear_test_reference(j: f64, times: &[f64]) -> Result<Vec<f64>> {
    integer_shape(j)?;
    if j == 1.0 {
        return Ok(times.iter().map(|&t| linear_j1_closed_form(t)).collect());
    }
    let t_end = times.iter().copied().fold(0.0, f64::max);
    let prob = linear_chain(erlang_approx(j, 1.0)?, HistoryFunction::Constant(1.0), t_end, InitMode::KernelConsistent)?;
    Ok(prob.solve(times, &chain_tolerance())?.component(0))
}

/// Logistic problem, `K = 2`, `τ = 2.25`, `ψ ≡ 1`, by tight RK45 on the chain.
pub fn logistic_test_reference(j: f64, times: &[f64]) -> Result<Vec<f64>> {
    integer_shape(j)?;
    let t_end = times.iter().copied().fold(0.0, f64::max);
    let prob = logistic_chain(
        erlang_approx(j, LOGISTIC_TAU)?,
        HistoryFunction::Constant(1.0),
        t_end,
        InitMode::KernelConsistent,
    )?;
    Ok(prob.solve(times, &chain_tolerance())?.component(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_solves_the_chain() {
        // Y' = 0.8Y - 1.1B, B' = Y - B, with B recovered from the first equation
        assert_eq!(linear_j1_closed_form(0.0), 1.0);
        assert!((linear_j1_sine_coefficient() + 0.371_390_676_354_103_7).abs() < 1e-15);
        let d = 1e-5;
        for &t in &[0.0, 0.7, 3.0, 9.5] {
            let y = |s: f64| linear_j1_closed_form(s);
            let dy = |s: f64| (y(s + d) - y(s - d)) / (2.0 * d);
            let b = |s: f64| (0.8 * y(s) - dy(s)) / 1.1;
            let db = (b(t + d) - b(t - d)) / (2.0 * d);
            assert!((db - (y(t) - b(t))).abs() < 1e-6, "t = {t}");
        }
        // initial B from the derivative at zero equals the history value 1
        let dy0 = (linear_j1_closed_form(1e-6) - linear_j1_closed_form(-1e-6)) / 2e-6;
        assert!((dy0 + 0.3).abs() < 1e-8);
    }

    #[test]
    fn closed_form_agrees_with_chain_solve() {
        let times: Vec<f64> = (0..=20).map(|k| k as f64 * 0.5).collect();
        let prob = linear_chain(
            erlang_approx(1.0, 1.0).unwrap(),
            HistoryFunction::Constant(1.0),
            10.0,
            InitMode::KernelConsistent,
        )
        .unwrap();
        let chain = prob.solve(&times, &chain_tolerance()).unwrap().component(0);
        for (t, c) in times.iter().zip(chain) {
            assert!((linear_j1_closed_form(*t) - c).abs() < 1e-10);
        }
    }

    #[test]
    fn logistic_reference_settles_at_capacity() {
        let v = logistic_test_reference(3.0, &[0.0, 800.0]).unwrap();
        assert_eq!(v[0], 1.0);
        assert!((v[1] - 2.0).abs() < 1e-7, "{}", v[1]);
        assert!(logistic_test_reference(2.5, &[1.0]).is_err());
    }

    #[test]
    fn tolerance_consistency() {
        let times: Vec<f64> = (0..=10).map(|k| k as f64).collect();
        for j in [3.0, 8.0] {
            let prob = logistic_chain(
                erlang_approx(j, LOGISTIC_TAU).unwrap(),
                HistoryFunction::Constant(1.0),
                10.0,
                InitMode::KernelConsistent,
            )
            .unwrap();
            let tight = prob.solve(&times, &chain_tolerance()).unwrap().component(0);
            let loose = prob.solve(&times, &OdeConfig::adaptive(Tolerances::uniform(1e-10))).unwrap().component(0);
            for (a, b) in tight.iter().zip(loose) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }
}
