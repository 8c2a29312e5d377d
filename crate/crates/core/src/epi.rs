//! SIR model with a hypoexponential infectious period, synthetic incidence and
//! serial-interval data, and maximum-likelihood fitting.
//!
//! ```text
//! S' = -β S I,   I₁' = β S I - γ₁ I₁,   Iᵢ' = γ_{i-1} I_{i-1} - γᵢ Iᵢ,   R' = γ_n I_n,
//! ```
//!
//! with `I = Σ Iᵢ` and stage rates `γ` from a two-moment approximation of a
//! gamma infectious period with mean `τ` and shape `j`.  Cases on `(t_{k-1}, t_k]`
//! are `Poisson(M ΔS_k)`, serial intervals have density `Q(j, j t/τ) / τ`.

use std::path::Path;

use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::approximations::{approximate, stiffness_check, ApproxConfig, ChainParams, Variant};
use crate::distributions::{sample_equilibrium_gamma, GammaKernel, Rng};
use crate::error::{invalid, Error, Result};
use crate::ode::{rk45_adaptive, Tolerances, Trajectory};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::special::{gamma_q, ln_gamma};

/// Default observation grid `t_k = k`, `k = 1..=120`.
pub fn default_obs_times() -> Vec<f64> {
    (1..=120).map(|k| k as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SirParams {
    pub beta: f64,
    pub tau: f64,
    pub j: f64,
    pub eps: f64,
    /// Population scale `M` turning fractions into expected counts.
    pub population: f64,
    pub obs_times: Vec<f64>,
    pub variant: Variant,
    pub approx: ApproxConfig,
}

impl SirParams {
    /// Fixed hypoexponential stages, `M = 1000`, daily observations for 120 days.
    pub fn new(beta: f64, tau: f64, j: f64, eps: f64) -> Self {
        Self {
            beta,
            tau,
            j,
            eps,
            population: 1000.0,
            obs_times: default_obs_times(),
            variant: Variant::Fixed,
            approx: ApproxConfig::default(),
        }
    }

    pub fn r0(&self) -> f64 {
        self.beta * self.tau
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.tau > 0.0 && self.j > 0.0)
            || !(self.beta.is_finite() && self.tau.is_finite() && self.j.is_finite())
        {
            return invalid(format!("need β, τ, j > 0 (got {}, {}, {})", self.beta, self.tau, self.j));
        }
        if !(self.eps >= 0.0 && self.eps < 1.0) {
            return invalid(format!("initial infected fraction must lie in [0, 1) (got {})", self.eps));
        }
        if !(self.population >= 1.0) {
            return invalid("population scale must be at least 1");
        }
        if self.obs_times.first().is_some_and(|&t| t <= 0.0) || self.obs_times.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("observation times must be positive and increasing");
        }
        Ok(())
    }
}

/// The SIR stage system, state `(S, I₁, …, I_n, R)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SirChain {
    pub params: SirParams,
    pub chain: ChainParams,
    pub rates: Vec<f64>,
    pub stiff: bool,
}

pub fn build_sir_chain(params: &SirParams) -> Result<SirChain> {
    params.validate()?;
    let chain = approximate(params.variant, params.j, params.tau, &params.approx)?;
    Ok(SirChain { params: params.clone(), rates: chain.rates(), stiff: stiffness_check(&chain, &params.approx), chain })
}

impl SirChain {
    pub fn stages(&self) -> usize {
        self.rates.len()
    }

    pub fn initial_state(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.rates.len() + 2];
        y[0] = 1.0 - self.params.eps;
        y[1] = self.params.eps;
        y
    }

    pub fn eval_rhs(&self, y: &[f64], dy: &mut [f64]) {
        let n = self.rates.len();
        let r = &self.rates;
        let infected: f64 = y[1..=n].iter().sum();
        let force = self.params.beta * y[0] * infected;
        dy[0] = -force;
        dy[1] = force - r[0] * y[1];
        for i in 1..n {
            dy[i + 1] = r[i - 1] * y[i] - r[i] * y[i + 1];
        }
        dy[n + 1] = r[n - 1] * y[n];
    }

    /// Full state at `times` (RK45, tolerance `tol`).
    pub fn solve(&self, times: &[f64], tol: f64) -> Result<Trajectory> {
        let mut t = Tolerances::uniform(tol);
        t.h_init = (0.1 / self.rates.iter().copied().fold(0.0, f64::max)).min(0.1);
        rk45_adaptive(|_, y, dy| self.eval_rhs(y, dy), &self.initial_state(), 0.0, times, &t, 50_000_000)
    }

    /// `M ΔS_k` over the observation grid.
    pub fn incidence(&self) -> Result<Vec<f64>> {
        let mut times = vec![0.0];
        times.extend(&self.params.obs_times);
        let s = self.solve(&times, 1e-10)?.component(0);
        Ok(s.windows(2).map(|w| (w[0] - w[1]).max(0.0) * self.params.population).collect())
    }
}

/// Expected counts `M ΔS_k` for `params`.
pub fn simulate_incidence(params: &SirParams) -> Result<Vec<f64>> {
    build_sir_chain(params)?.incidence()
}

/// Serial-interval density `h(t) = Q(j, j t/τ) / τ`.
pub fn serial_density(j: f64, tau: f64, t: f64) -> Result<f64> {
    if t < 0.0 {
        return invalid(format!("serial interval must be nonnegative (got {t})"));
    }
    Ok(GammaKernel::with_mean(j, tau)?.survival(t)? / tau)
}

pub fn sample_serial(rng: &mut Rng, j: f64, tau: f64) -> Result<f64> {
    Ok(sample_equilibrium_gamma(rng, &GammaKernel::with_mean(j, tau)?))
}

/// Observed case counts on `(t_{k-1}, t_k]` and serial intervals.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EpiData {
    pub times: Vec<f64>,
    pub cases: Vec<u64>,
    pub serial: Vec<f64>,
}

/// Poisson counts around the model incidence plus `n_serial` serial intervals.
pub fn synthetic_data(params: &SirParams, n_serial: usize, rng: &mut Rng) -> Result<EpiData> {
    let expected = simulate_incidence(params)?;
    let cases = expected
        .iter()
        .map(|&mu| if mu > 0.0 { Poisson::new(mu).map(|p| p.sample(rng) as u64).unwrap_or(0) } else { 0 })
        .collect();
    let serial = (0..n_serial).map(|_| sample_serial(rng, params.j, params.tau)).collect::<Result<_>>()?;
    Ok(EpiData { times: params.obs_times.clone(), cases, serial })
}

/// `log P(x | Poisson(μ))`, `-∞` when `μ = 0 < x`.
pub fn poisson_log_pmf(x: u64, mu: f64) -> f64 {
    if mu <= 0.0 {
        return if x == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if x == 0 {
        return -mu;
    }
    let xf = x as f64;
    -mu + xf * mu.ln() - ln_gamma(xf + 1.0)
}

/// `Σ log Poisson(C_k | M ΔS_k) + Σ log h(T_ℓ)`, with the model observed at `data.times`.
pub fn log_likelihood(params: &SirParams, data: &EpiData) -> Result<f64> {
    if data.times.len() != data.cases.len() {
        return invalid("case counts and observation times differ in length");
    }
    let mut total = 0.0;
    if !data.cases.is_empty() {
        let mut p = params.clone();
        p.obs_times = data.times.clone();
        let expected = simulate_incidence(&p)?;
        total += data.cases.iter().zip(&expected).map(|(&c, &mu)| poisson_log_pmf(c, mu)).sum::<f64>();
    }
    let a = params.j / params.tau;
    for &t in &data.serial {
        if t < 0.0 {
            return invalid(format!("serial interval must be nonnegative (got {t})"));
        }
        total += (gamma_q(params.j, a * t) / params.tau).ln();
    }
    Ok(total)
}

/// Box on the shape parameter; the other parameters are searched in log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitBounds {
    pub j_min: f64,
    pub j_max: f64,
}

impl Default for FitBounds {
    fn default() -> Self {
        Self { j_min: 1.01, j_max: 20.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub beta: f64,
    pub tau: f64,
    pub j: f64,
    pub eps: f64,
    pub loglik: f64,
    pub n_evals: usize,
    pub converged: bool,
    /// Best log-likelihood after each optimizer iteration.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<f64>,
}

/// Maximizes the log-likelihood over `(β, τ, j, ε)` with Nelder-Mead.
///
/// Fails with [`Error::BudgetExceeded`] when `opts.max_evals` runs out first.
///
/// The SIR stages use the regularized smoothed rates so that the objective
/// varies continuously in `j`; `template` supplies the population scale and
/// the regularization constants, and its `(β, τ, j, ε)` are the starting point.
pub fn mle_fit(
    data: &EpiData,
    template: &SirParams,
    bounds: &FitBounds,
    opts: &NelderMeadOptions,
) -> Result<FitReport> {
    if !(bounds.j_min > 1.0 && bounds.j_max > bounds.j_min) {
        return invalid(format!("shape bounds must satisfy 1 < j_min < j_max (got {bounds:?})"));
    }
    template.validate()?;
    if !(template.eps > 0.0) {
        return invalid("the starting ε must be positive");
    }
    let clamp_j = |j: f64| j.clamp(bounds.j_min, bounds.j_max);
    let unpack = |x: &[f64]| -> SirParams {
        let mut p = template.clone();
        p.variant = Variant::SmoothedRegularized;
        p.beta = x[0].exp();
        p.tau = x[1].exp();
        p.j = clamp_j(x[2]);
        p.eps = x[3].exp().min(0.5);
        p
    };
    let x0 = [template.beta.ln(), template.tau.ln(), clamp_j(template.j), template.eps.ln()];
    let objective = |x: &[f64]| match log_likelihood(&unpack(x), data) {
        Ok(v) if v.is_finite() => -v,
        _ => f64::INFINITY,
    };
    let best = nelder_mead(objective, &x0, opts)?;
    if !best.converged {
        return Err(Error::BudgetExceeded(opts.max_evals));
    }
    let p = unpack(&best.x);
    Ok(FitReport {
        beta: p.beta,
        tau: p.tau,
        j: p.j,
        eps: p.eps,
        loglik: -best.value,
        n_evals: best.n_evals,
        converged: best.converged,
        trace: best.trace.iter().map(|v| -v).collect(),
    })
}

#[derive(Debug, Deserialize)]
struct CaseRow {
    t: f64,
    count: u64,
}

#[derive(Debug, Deserialize)]
struct SerialRow {
    interval: f64,
}

pub fn write_cases(path: &Path, data: &EpiData) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "count"])?;
    for (&t, &count) in data.times.iter().zip(&data.cases) {
        w.write_record([format!("{t:.16e}"), count.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_serial(path: &Path, data: &EpiData) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["interval"])?;
    for &v in &data.serial {
        w.write_record([format!("{v:.16e}")])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `cases.csv` (`t,count`) and, if given, `serial.csv` (`interval`).
pub fn read_data(cases: &Path, serial: Option<&Path>) -> Result<EpiData> {
    let mut data = EpiData::default();
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(cases)?;
    for row in r.deserialize() {
        let row: CaseRow = row?;
        data.times.push(row.t);
        data.cases.push(row.count);
    }
    if let Some(path) = serial {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        for row in r.deserialize() {
            let row: SerialRow = row?;
            data.serial.push(row.interval);
        }
    }
    Ok(data)
}
