//! Delay kernels: gamma (and its Erlang / exponential special cases) and
//! hypoexponential densities, survival functions, MGFs and seeded samplers.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{domain, invalid, Result};
use crate::ode::{rk45_adaptive, Tolerances};
use crate::special::{gamma_q, ln_gamma};

/// Gamma density `g(s) = a^j s^(j-1) e^(-a s) / Γ(j)` with shape `j` and rate `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaKernel {
    shape: f64,
    rate: f64,
}

impl GammaKernel {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite()) || !(rate > 0.0 && rate.is_finite()) {
            return invalid(format!("gamma kernel needs shape > 0 and rate > 0 (got j = {shape}, a = {rate})"));
        }
        Ok(Self { shape, rate })
    }

    /// Kernel with shape `j` and mean `tau` (rate `j / tau`).
    pub fn with_mean(shape: f64, mean: f64) -> Result<Self> {
        if !(mean > 0.0) {
            return invalid("mean delay must be positive");
        }
        Self::new(shape, shape / mean)
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    pub fn variance(&self) -> f64 {
        self.shape / (self.rate * self.rate)
    }

    pub fn pdf(&self, s: f64) -> Result<f64> {
        if s < 0.0 {
            return domain(format!("gamma pdf evaluated at negative time {s}"));
        }
        if s == 0.0 {
            return Ok(match self.shape {
                j if j > 1.0 => 0.0,
                1.0 => self.rate,
                _ => f64::INFINITY,
            });
        }
        Ok(self.ln_pdf_unchecked(s).exp())
    }

    pub(crate) fn ln_pdf_unchecked(&self, s: f64) -> f64 {
        let (j, a) = (self.shape, self.rate);
        j * a.ln() + (j - 1.0) * s.ln() - a * s - ln_gamma(j)
    }

    /// `P(X >= t)`, the regularized upper incomplete gamma `Q(j, a t)`.
    pub fn survival(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return domain(format!("gamma survival evaluated at negative time {t}"));
        }
        Ok(gamma_q(self.shape, self.rate * t))
    }

    pub fn cdf(&self, t: f64) -> Result<f64> {
        Ok(1.0 - self.survival(t)?)
    }

    /// `E[e^{θX}] = (1 - θ/a)^{-j}` for `θ < a`.
    pub fn mgf(&self, theta: f64) -> Result<f64> {
        if theta >= self.rate {
            return domain(format!("gamma MGF requires θ < a (θ = {theta}, a = {})", self.rate));
        }
        Ok((1.0 - theta / self.rate).powf(-self.shape))
    }
}

/// Sum of independent exponential stages with the given rates, traversed in order.
#[derive(Debug, Clone, PartialEq)]
pub struct HypoexpKernel {
    rates: Vec<f64>,
}

impl HypoexpKernel {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() {
            return invalid("hypoexponential kernel needs at least one stage");
        }
        if let Some(r) = rates.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return invalid(format!("stage rates must be positive and finite (got {r})"));
        }
        Ok(Self { rates })
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn stages(&self) -> usize {
        self.rates.len()
    }

    pub fn min_rate(&self) -> f64 {
        self.rates.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn mean(&self) -> f64 {
        self.rates.iter().map(|r| 1.0 / r).sum()
    }

    pub fn variance(&self) -> f64 {
        self.rates.iter().map(|r| 1.0 / (r * r)).sum()
    }

    /// `(mean, variance)`.
    pub fn moments(&self) -> (f64, f64) {
        (self.mean(), self.variance())
    }

    /// `Π λᵢ / (λᵢ - θ)` for `θ < min λᵢ`.
    pub fn mgf(&self, theta: f64) -> Result<f64> {
        let min = self.min_rate();
        if theta >= min {
            return domain(format!("hypoexponential MGF requires θ < {min} (got {theta})"));
        }
        Ok(self.rates.iter().map(|r| r / (r - theta)).product())
    }

    /// Stage occupation probabilities at time `t`, starting with all mass in stage 1.
    ///
    /// Integrates the upper bidiagonal generator, which stays valid for repeated rates.
    pub fn occupation(&self, t: f64) -> Result<Vec<f64>> {
        if t < 0.0 {
            return domain(format!("hypoexponential occupation evaluated at negative time {t}"));
        }
        let n = self.rates.len();
        let mut p0 = vec![0.0; n];
        p0[0] = 1.0;
        if t == 0.0 {
            return Ok(p0);
        }
        let rates = &self.rates;
        let mut tol = Tolerances::new(1e-12, 1e-15);
        tol.h_init = (0.1 / rates.iter().copied().fold(0.0, f64::max)).min(t);
        let traj = rk45_adaptive(
            |_, p: &[f64], dp: &mut [f64]| {
                dp[0] = -rates[0] * p[0];
                for i in 1..p.len() {
                    dp[i] = rates[i - 1] * p[i - 1] - rates[i] * p[i];
                }
            },
            &p0,
            0.0,
            &[t],
            &tol,
            50_000_000,
        )?;
        Ok(traj.states.into_iter().next().unwrap())
    }

    /// Probability that absorption has not happened by time `t`.
    pub fn survival(&self, t: f64) -> Result<f64> {
        let p = self.occupation(t)?;
        Ok(p.iter().sum::<f64>().clamp(0.0, 1.0))
    }

    /// Density `λ_n p_n(t)` of the absorption time.
    pub fn pdf(&self, t: f64) -> Result<f64> {
        let p = self.occupation(t)?;
        Ok(self.rates[self.rates.len() - 1] * p[p.len() - 1])
    }
}

/// Seedable random stream (ChaCha8, counter based) shared by all samplers.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn seeded(seed: u64) -> Self {
        Self { seed, inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform variate on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        // 53 random mantissa bits
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for Rng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

pub fn sample_gamma(rng: &mut Rng, kernel: &GammaKernel) -> f64 {
    Gamma::new(kernel.shape, 1.0 / kernel.rate).expect("validated kernel").sample(rng)
}

/// Draws from the equilibrium (residual-time) density `S(t) / mean`, where
/// `S` is the kernel's survival function: `U · G` with `U ~ U(0,1)` and `G`
/// gamma with shape `j + 1` and the kernel's rate.
pub fn sample_equilibrium_gamma(rng: &mut Rng, kernel: &GammaKernel) -> f64 {
    let sized = GammaKernel { shape: kernel.shape + 1.0, rate: kernel.rate };
    let g = sample_gamma(rng, &sized);
    rng.uniform() * g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_adaptive, integrate_half_line};

    #[test]
    fn gamma_pdf_closed_forms() {
        let exp1 = GammaKernel::new(1.0, 1.0).unwrap();
        assert_eq!(exp1.pdf(0.0).unwrap(), 1.0);
        let erl2 = GammaKernel::new(2.0, 1.0).unwrap();
        assert!((erl2.pdf(1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(erl2.pdf(0.0).unwrap(), 0.0);
        assert!(exp1.pdf(-0.1).is_err());
    }

    #[test]
    fn gamma_pdf_fractional_shape_value() {
        // 2.5^2.5 e^{-2.5} / Γ(2.5), Γ(2.5) = 3√π/4
        let want = 2.5f64.powf(2.5) * (-2.5f64).exp() / (0.75 * std::f64::consts::PI.sqrt());
        let k = GammaKernel::new(2.5, 2.5).unwrap();
        assert!((k.pdf(1.0).unwrap() - want).abs() < 1e-14);
        // high precision reference value
        assert!((want - 0.610_207_606_746_937).abs() < 1e-14);
    }

    #[test]
    fn gamma_pdf_integrates_to_one() {
        for &(j, a) in &[(0.8, 1.3), (1.0, 1.0), (2.5, 2.5), (7.0, 0.5), (14.0, 6.2)] {
            let k = GammaKernel::new(j, a).unwrap();
            let total = integrate_half_line(|s| k.pdf(s).unwrap(), 1e-12);
            assert!((total - 1.0).abs() < 1e-8, "j = {j}: {total}");
        }
    }

    #[test]
    fn gamma_survival_matches_tail_integral() {
        let k = GammaKernel::new(2.5, 2.5).unwrap();
        assert_eq!(k.survival(0.0).unwrap(), 1.0);
        let tail = integrate_half_line(|s| k.pdf(1.0 + s).unwrap(), 1e-13);
        let got = k.survival(1.0).unwrap();
        assert!((got - tail).abs() < 1e-10, "{got} vs {tail}");
        assert!((got - 0.415_880_186_995_507_9).abs() < 1e-14);
        let exp1 = GammaKernel::new(1.0, 1.0).unwrap();
        assert!((exp1.survival(1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!(k.survival(-1.0).is_err());
    }

    #[test]
    fn gamma_mgf_values() {
        let exp1 = GammaKernel::new(1.0, 1.0).unwrap();
        assert!((exp1.mgf(-1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(exp1.mgf(1.0).is_err());
        let k = GammaKernel::new(2.15, 0.4624).unwrap();
        assert_eq!(k.mgf(0.0).unwrap(), 1.0);
        let numeric = integrate_half_line(|s| (-0.1 * s).exp() * k.pdf(s).unwrap(), 1e-13);
        assert!((k.mgf(-0.1).unwrap() - numeric).abs() < 1e-10);
    }

    #[test]
    fn hypoexp_moments_and_mgf() {
        let k = HypoexpKernel::new(vec![1.0, 2.0]).unwrap();
        assert_eq!(k.mgf(0.0).unwrap(), 1.0);
        assert_eq!(k.moments(), (1.5, 1.25));
        assert!(k.mgf(1.0).is_err());
        assert!(HypoexpKernel::new(vec![]).is_err());
        assert!(HypoexpKernel::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn hypoexp_moments_match_mgf_derivatives() {
        let k = HypoexpKernel::new(vec![3.0, 3.0, 1.938, 6.633]).unwrap();
        let d = 1e-4;
        let (m0, mp, mm) = (k.mgf(0.0).unwrap(), k.mgf(d).unwrap(), k.mgf(-d).unwrap());
        let first = (mp - mm) / (2.0 * d);
        let second = (mp - 2.0 * m0 + mm) / (d * d);
        let (mean, var) = k.moments();
        assert!((first - mean).abs() / mean < 1e-6);
        assert!((second - mean * mean - var).abs() / var < 1e-6);
    }

    #[test]
    fn hypoexp_survival_closed_forms() {
        let single = HypoexpKernel::new(vec![1.7]).unwrap();
        assert!((single.survival(0.9).unwrap() - (-1.7f64 * 0.9).exp()).abs() < 1e-11);
        let two = HypoexpKernel::new(vec![1.0, 2.0]).unwrap();
        assert_eq!(two.survival(0.0).unwrap(), 1.0);
        let want = 2.0 * (-1.0f64).exp() - (-2.0f64).exp();
        assert!((two.survival(1.0).unwrap() - want).abs() < 1e-8);
        assert!((want - 0.6004236).abs() < 1e-7);
    }

    #[test]
    fn hypoexp_survival_partial_fractions() {
        // distinct rates: S(t) = Σ_i Π_{k≠i} λ_k/(λ_k - λ_i) e^{-λ_i t}
        let rates = vec![0.7, 1.9, 3.3, 5.2];
        let k = HypoexpKernel::new(rates.clone()).unwrap();
        for &t in &[0.1, 0.8, 2.0, 6.0] {
            let closed: f64 = (0..rates.len())
                .map(|i| {
                    let c: f64 =
                        (0..rates.len()).filter(|&m| m != i).map(|m| rates[m] / (rates[m] - rates[i])).product();
                    c * (-rates[i] * t).exp()
                })
                .sum();
            assert!((k.survival(t).unwrap() - closed).abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn hypoexp_repeated_rates_match_erlang() {
        let k = HypoexpKernel::new(vec![2.0; 4]).unwrap();
        let g = GammaKernel::new(4.0, 2.0).unwrap();
        for &t in &[0.3, 1.0, 2.5] {
            assert!((k.survival(t).unwrap() - g.survival(t).unwrap()).abs() < 1e-9);
            assert!((k.pdf(t).unwrap() - g.pdf(t).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn rng_is_reproducible() {
        let mut a = Rng::seeded(42);
        let mut b = Rng::seeded(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        assert_eq!(a.seed(), 42);
        let u = Rng::seeded(1).uniform();
        assert!((0.0..1.0).contains(&u));
    }

    #[test]
    fn gamma_sample_mean() {
        let k = GammaKernel::new(4.0, 0.8).unwrap();
        let mut rng = Rng::seeded(7);
        let n = 100_000;
        let mean = (0..n).map(|_| sample_gamma(&mut rng, &k)).sum::<f64>() / n as f64;
        let se = (k.variance() / n as f64).sqrt();
        assert!((mean - 5.0).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn equilibrium_sampler_matches_numeric_cdf() {
        let k = GammaKernel::with_mean(4.0, 5.0).unwrap();
        let density = |t: f64| k.survival(t).unwrap() / 5.0;
        let mut rng = Rng::seeded(11);
        let n = 100_000;
        let mut draws: Vec<f64> = (0..n).map(|_| sample_equilibrium_gamma(&mut rng, &k)).collect();
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ks: f64 = 0.0;
        for q in 1..50 {
            let idx = q * n / 50;
            let x = draws[idx];
            let cdf = integrate_adaptive(density, 0.0, x, 1e-11);
            ks = ks.max((cdf - idx as f64 / n as f64).abs());
        }
        assert!(ks < 0.01, "Kolmogorov distance {ks}");

        let numeric_mean = integrate_half_line(|t| t * density(t), 1e-11);
        let sample_mean = draws.iter().sum::<f64>() / n as f64;
        // E[T] = E[G^2] / (2 E[G]) = (τ/2)(1 + 1/j)
        assert!((numeric_mean - 2.5 * 1.25).abs() < 1e-8);
        assert!((sample_mean - numeric_mean).abs() < 0.05, "{sample_mean} vs {numeric_mean}");
    }
}
