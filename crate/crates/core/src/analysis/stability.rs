//! Linear stability of chain systems and growth rates of simulated trajectories.

use nalgebra::{linalg::Schur, Complex, DMatrix};

use crate::approximations::ChainParams;
use crate::error::{invalid, Error, Result};

/// Matrix of the chain system for `F(x, I) = αx + βI`, state `(Y, B₁, …, B_n)`.
pub fn linear_chain_matrix(alpha: f64, beta: f64, params: &ChainParams) -> DMatrix<f64> {
    let rates = params.rates();
    let n = rates.len();
    let mut m = DMatrix::zeros(n + 1, n + 1);
    m[(0, 0)] = alpha;
    m[(0, n)] += beta * rates[n - 1];
    m[(1, 0)] = 1.0;
    m[(1, 1)] = -rates[0];
    for i in 1..n {
        m[(i + 1, i)] = rates[i - 1];
        m[(i + 1, i + 1)] = -rates[i];
    }
    m
}

/// Eigenvalue of the chain matrix with the largest real part.
pub fn dominant_eigenvalue(alpha: f64, beta: f64, params: &ChainParams) -> Result<Complex<f64>> {
    let m = linear_chain_matrix(alpha, beta, params);
    let schur = Schur::try_new(m, 1e-14, 100_000).ok_or(Error::EigenNoConvergence)?;
    schur.complex_eigenvalues().iter().copied().max_by(|a, b| a.re.total_cmp(&b.re)).ok_or(Error::EigenNoConvergence)
}

/// Exponential growth rate of an oscillating trajectory: least-squares slope of
/// `ln |x|` at the local maxima of `|x|` over the second half of the samples.
pub fn growth_rate(times: &[f64], values: &[f64]) -> Result<f64> {
    if times.len() != values.len() || times.len() < 3 {
        return invalid("growth rate needs matching time and value samples");
    }
    let start = times.len() / 2;
    let mut peaks = Vec::new();
    for k in start.max(1)..times.len() - 1 {
        let (l, c, r) = (values[k - 1].abs(), values[k].abs(), values[k + 1].abs());
        if c > l && c >= r && c > 0.0 {
            peaks.push((times[k], c.ln()));
        }
    }
    if peaks.len() < 4 {
        return invalid(format!("growth rate needs at least 4 peaks (found {})", peaks.len()));
    }
    let n = peaks.len() as f64;
    let mt = peaks.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = peaks.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = peaks.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let stl: f64 = peaks.iter().map(|p| (p.0 - mt) * (p.1 - ml)).sum();
    Ok(stl / stt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approximations::{erlang_approx, fixed_hypoexp, smoothed_hypoexp};
    use crate::problems::char_root;

    #[test]
    fn decoupled_system() {
        let p = fixed_hypoexp(2.5, 1.0).unwrap();
        let l = dominant_eigenvalue(0.3, 0.0, &p).unwrap();
        assert!((l.re - 0.3).abs() < 1e-12 && l.im.abs() < 1e-12);
    }

    #[test]
    fn eigenfunction_rate_is_dominant() {
        for (tau, j, beta) in [(2.0, 3.0, 0.5), (1.0, 2.0, 1.3), (3.0, 5.0, 0.2)] {
            let a = j / tau;
            let lam = char_root(tau, j, beta).unwrap();
            let l = dominant_eigenvalue(-a, beta, &erlang_approx(j, tau).unwrap()).unwrap();
            assert!((l.re - lam).abs() < 1e-8, "{l} vs {lam}");
        }
    }

    #[test]
    fn integer_shape_chains_agree() {
        for j in [2.0, 4.0, 7.0] {
            let e = dominant_eigenvalue(0.8, -1.1, &erlang_approx(j, 1.0).unwrap()).unwrap();
            let f = dominant_eigenvalue(0.8, -1.1, &fixed_hypoexp(j, 1.0).unwrap()).unwrap();
            let s = dominant_eigenvalue(0.8, -1.1, &smoothed_hypoexp(j, 1.0).unwrap()).unwrap();
            assert!((e - f).norm() < 1e-10 && (e - s).norm() < 1e-10);
        }
    }

    #[test]
    fn stability_sign_disagreement() {
        for (j, alpha, beta) in [(2.5, 0.89, -1.15), (4.495, 0.825, -1.175)] {
            let h = dominant_eigenvalue(alpha, beta, &fixed_hypoexp(j, 1.0).unwrap()).unwrap();
            let e = dominant_eigenvalue(alpha, beta, &erlang_approx(j, 1.0).unwrap()).unwrap();
            assert!(h.re.signum() != e.re.signum(), "j = {j}: {h} vs {e}");
        }
    }

    #[test]
    fn growth_rate_of_damped_oscillation() {
        let times: Vec<f64> = (0..20_000).map(|k| k as f64 * 0.01).collect();
        let values: Vec<f64> = times.iter().map(|t| (-0.05 * t).exp() * (1.3 * t).cos()).collect();
        let g = growth_rate(&times, &values).unwrap();
        assert!((g + 0.05).abs() < 1e-3, "{g}");
        assert!(growth_rate(&times[..50], &values[..50]).is_err());
    }
}
