use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::fcrk::{fcrk4_solve, DdeProblem};
use crate::quadrature::QuadConfig;

/// Errors below this are treated as round-off and left out of the fit.
pub const PRECISION_FLOOR: f64 = 100.0 * f64::EPSILON;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    /// `(h, max error)` pairs as measured.
    pub points: Vec<(f64, f64)>,
    /// Least-squares slope of `log₁₀ E` against `log₁₀ h`.
    pub slope: f64,
    pub intercept: f64,
    /// Number of points above the precision floor that entered the fit.
    pub fitted: usize,
}

/// Fits `log₁₀ E = intercept + slope · log₁₀ h`, dropping points below the precision floor.
pub fn estimate_order(points: &[(f64, f64)]) -> Result<ConvergenceReport> {
    if points.len() < 3 {
        return invalid(format!("order estimation needs at least 3 points (got {})", points.len()));
    }
    if points.iter().any(|&(h, e)| !(h > 0.0) || !(e >= 0.0) || !e.is_finite()) {
        return invalid("order estimation needs h > 0 and finite errors");
    }
    let used: Vec<(f64, f64)> =
        points.iter().filter(|p| p.1 >= PRECISION_FLOOR).map(|&(h, e)| (h.log10(), e.log10())).collect();
    if used.len() < 2 {
        return invalid("fewer than two errors lie above the precision floor");
    }
    let n = used.len() as f64;
    let mx = used.iter().map(|p| p.0).sum::<f64>() / n;
    let my = used.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = used.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = used.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok(ConvergenceReport { points: points.to_vec(), slope, intercept: my - slope * mx, fitted: used.len() })
}

/// Where the error of an FCRK solve is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorNorm {
    /// Mesh points only.
    Discrete,
    /// Mesh points and `k` interior points per step through the interpolant.
    Global(usize),
}

/// Max errors of FCRK solves at each step size against `reference(times)`.
///
/// Solves run in parallel; the quadrature panel count is coupled to `h` with constant `xi`.
pub fn fcrk_convergence<R>(
    problem: &DdeProblem,
    steps: &[f64],
    xi: f64,
    norm: ErrorNorm,
    reference: R,
) -> Result<ConvergenceReport>
where
    R: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    let points: Result<Vec<(f64, f64)>> = steps
        .par_iter()
        .map(|&h| {
            let sol = fcrk4_solve(problem, h, &QuadConfig::coupled(h, xi))?;
            let per_step = match norm {
                ErrorNorm::Discrete => 1,
                ErrorNorm::Global(k) => k + 1,
            };
            let times: Vec<f64> = (0..sol.steps() * per_step + 1)
                .map(|k| sol.t0() + k as f64 * sol.step() / per_step as f64)
                .map(|t| t.min(sol.t_end()))
                .collect();
            let want = reference(&times)?;
            let mut err = 0.0f64;
            for (t, w) in times.iter().zip(want) {
                err = err.max((sol.query_scalar(*t)? - w).abs());
            }
            Ok((h, err))
        })
        .collect();
    estimate_order(&points?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_orders() {
        let r = estimate_order(&[0.1, 0.05, 0.025].map(|h: f64| (h, h.powi(4)))).unwrap();
        assert!((r.slope - 4.0).abs() < 1e-12);
        let r = estimate_order(&[0.1, 0.05, 0.025].map(|h: f64| (h, 3.0 * h * h))).unwrap();
        assert!((r.slope - 2.0).abs() < 1e-12);
        assert!((r.intercept - 3f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn floor_points_are_dropped() {
        let r = estimate_order(&[(0.1, 1e-4), (0.05, 6.25e-6), (0.01, 1e-17)]).unwrap();
        assert_eq!(r.fitted, 2);
        assert!((r.slope - 4.0).abs() < 1e-12);
        assert!(estimate_order(&[(0.1, 1e-17), (0.05, 1e-18), (0.01, 0.0)]).is_err());
        assert!(estimate_order(&[(0.1, 1e-3), (0.05, 1e-4)]).is_err());
    }
}
