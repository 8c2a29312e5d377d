//! Finite stage approximations of a gamma kernel with mean `τ` and shape `j`.
//!
//! * Erlang: `[j]` stages at rate `[j]/τ` (mean matched only).
//! * Fixed hypoexponential: `n = max(⌈j⌉, 2)` stages, `n - 2` of them at `n/τ`
//!   followed by rates `ν`, `μ` chosen to match mean and variance.
//! * Smoothed hypoexponential: the `n - 2` common stages run at `j/τ`, which
//!   varies continuously in `j`.
//! * Regularized smoothed: the smoothed rates with the square root and the
//!   fast stage pulled away from their singular limits.
//!
//! All hypoexponential variants are exact (every rate equal to `j/τ`) at integer `j`.

use serde::{Deserialize, Serialize};

use crate::distributions::HypoexpKernel;
use crate::error::{invalid, Result};
use crate::special::gamma_q;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Erlang,
    Fixed,
    Smoothed,
    SmoothedRegularized,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Erlang, Variant::Fixed, Variant::Smoothed, Variant::SmoothedRegularized];

    pub fn name(&self) -> &'static str {
        match self {
            Variant::Erlang => "erlang",
            Variant::Fixed => "fixed",
            Variant::Smoothed => "smoothed",
            Variant::SmoothedRegularized => "smoothed_regularized",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "erlang" => Ok(Variant::Erlang),
            "fixed" => Ok(Variant::Fixed),
            "smoothed" => Ok(Variant::Smoothed),
            "smoothed_regularized" | "regularized" => Ok(Variant::SmoothedRegularized),
            other => invalid(format!("unknown approximation variant '{other}'")),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxConfig {
    /// Offset `ε` moving the fast stage of the regularized variant away from infinity.
    pub eps: f64,
    /// Regularizer under the square root of the regularized variant.
    pub hbar: f64,
    /// Ratio `max rate · τ / n` above which a chain is reported as stiff.
    pub stiffness_threshold: f64,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        Self { eps: 1e-3, hbar: 1e-3, stiffness_threshold: 100.0 }
    }
}

impl ApproxConfig {
    pub fn regularized(eps: f64, hbar: f64) -> Self {
        Self { eps, hbar, ..Self::default() }
    }
}

/// Stage structure of an approximating chain: `n - 2` stages at `common_rate`,
/// then `ν`, then `μ`.  For the Erlang variant every rate equals `common_rate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub n: usize,
    pub common_rate: f64,
    pub nu: f64,
    pub mu: f64,
    pub variant: Variant,
    pub tau: f64,
    pub j: f64,
}

impl ChainParams {
    /// Stage rates in traversal order.
    pub fn rates(&self) -> Vec<f64> {
        match self.variant {
            Variant::Erlang => vec![self.common_rate; self.n],
            _ => {
                let mut r = vec![self.common_rate; self.n - 2];
                r.push(self.nu);
                r.push(self.mu);
                r
            }
        }
    }

    /// Rate of the last stage, which multiplies its occupation in the delayed term.
    pub fn delayed_rate(&self) -> f64 {
        match self.variant {
            Variant::Erlang => self.common_rate,
            _ => self.mu,
        }
    }

    pub fn kernel(&self) -> HypoexpKernel {
        HypoexpKernel::new(self.rates()).expect("chain rates are validated on construction")
    }

    pub fn mean(&self) -> f64 {
        self.rates().iter().map(|r| 1.0 / r).sum()
    }

    pub fn variance(&self) -> f64 {
        self.rates().iter().map(|r| 1.0 / (r * r)).sum()
    }

    pub fn max_rate(&self) -> f64 {
        self.rates().into_iter().fold(0.0, f64::max)
    }

    /// Probability that the chain has not been traversed by time `t`.
    ///
    /// The two exponential stages are handled in closed form and convolved
    /// with the Erlang block by adaptive quadrature, which stays accurate when
    /// `ν` or `μ` is very large.
    pub fn survival(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return crate::error::domain(format!("chain survival evaluated at negative time {t}"));
        }
        if t == 0.0 {
            return Ok(1.0);
        }
        if self.variant == Variant::Erlang {
            return Ok(gamma_q(self.n as f64, self.common_rate * t));
        }
        let (slow, fast) = if self.nu <= self.mu { (self.nu, self.mu) } else { (self.mu, self.nu) };
        let d = fast - slow;
        let tail = move |u: f64| {
            let spread = if d == 0.0 { u } else { -(-d * u).exp_m1() / d };
            (-slow * u).exp() * (1.0 + slow * spread)
        };
        let m = self.n - 2;
        if m == 0 {
            return Ok(tail(t));
        }
        let erlang = crate::distributions::GammaKernel::new(m as f64, self.common_rate)?;
        let head = gamma_q(m as f64, self.common_rate * t);
        let body = crate::quadrature::integrate_adaptive(
            |x| if x <= 0.0 { 0.0 } else { erlang.ln_pdf_unchecked(x).exp() * tail(t - x) },
            0.0,
            t,
            1e-15,
        );
        Ok((head + body).clamp(0.0, 1.0))
    }

    fn validated(self) -> Result<Self> {
        if let Some(r) = self.rates().iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return invalid(format!("{} approximation of j = {} produced rate {r}", self.variant, self.j));
        }
        Ok(self)
    }
}

fn check(j: f64, tau: f64) -> Result<()> {
    if !(j > 0.0 && j.is_finite()) || !(tau > 0.0 && tau.is_finite()) {
        return invalid(format!("approximations need j > 0 and τ > 0 (got j = {j}, τ = {tau})"));
    }
    Ok(())
}

/// Nearest integer, halves away from zero, never below 1.
pub fn nearest_shape(j: f64) -> usize {
    (j.round() as usize).max(1)
}

/// Fractional part on `(0, 1]`: integers map to 1.
fn frac_upper(j: f64) -> f64 {
    j - (j.ceil() - 1.0)
}

pub fn erlang_approx(j: f64, tau: f64) -> Result<ChainParams> {
    check(j, tau)?;
    let n = nearest_shape(j);
    let b = n as f64 / tau;
    ChainParams { n, common_rate: b, nu: b, mu: b, variant: Variant::Erlang, tau, j }.validated()
}

pub fn fixed_hypoexp(j: f64, tau: f64) -> Result<ChainParams> {
    check(j, tau)?;
    let n = (j.ceil() as usize).max(2);
    let nf = n as f64;
    // n(n - j) equals n(1 - {j}) whenever ⌈j⌉ ≥ 2 and j is not an integer
    let root = (nf * (nf - j) / (2.0 * j)).sqrt();
    let inv_nu = tau / nf * (1.0 + root);
    let inv_mu = tau / nf * (1.0 - root);
    if !(inv_mu > 0.0) {
        return invalid(format!("fixed hypoexponential approximation needs j > 1 (got j = {j})"));
    }
    if root == 0.0 {
        let r = nf / tau;
        return ChainParams { n, common_rate: r, nu: r, mu: r, variant: Variant::Fixed, tau, j }.validated();
    }
    ChainParams { n, common_rate: nf / tau, nu: 1.0 / inv_nu, mu: 1.0 / inv_mu, variant: Variant::Fixed, tau, j }
        .validated()
}

fn smoothed_inner(j: f64, tau: f64, eps: f64, hbar: f64, variant: Variant) -> Result<ChainParams> {
    check(j, tau)?;
    if !(j > 1.0) {
        return invalid(format!("smoothed hypoexponential approximations need j > 1 (got j = {j})"));
    }
    let n = j.ceil() as usize;
    let f = frac_upper(j);
    let root = (1.0 - f * f + hbar * hbar).sqrt();
    let scale = tau / (2.0 * j);
    let inv_mu = scale * (1.0 + f + root - eps);
    let inv_nu = scale * (1.0 + f - root + eps);
    if !(inv_nu > 0.0 && inv_mu > 0.0) {
        return invalid(format!("regularized rates are not positive for j = {j}, ε = {eps}, hbar = {hbar}"));
    }
    if root == eps && f == 1.0 {
        let r = j / tau;
        return ChainParams { n, common_rate: r, nu: r, mu: r, variant, tau, j }.validated();
    }
    ChainParams { n, common_rate: j / tau, nu: 1.0 / inv_nu, mu: 1.0 / inv_mu, variant, tau, j }.validated()
}

pub fn smoothed_hypoexp(j: f64, tau: f64) -> Result<ChainParams> {
    smoothed_inner(j, tau, 0.0, 0.0, Variant::Smoothed)
}

pub fn regularized_smoothed(j: f64, tau: f64, cfg: &ApproxConfig) -> Result<ChainParams> {
    if !(cfg.eps >= 0.0 && cfg.eps < 1.0) || !(cfg.hbar >= 0.0 && cfg.hbar.is_finite()) {
        return invalid(format!(
            "regularization needs 0 ≤ ε < 1 and hbar ≥ 0 (got ε = {}, hbar = {})",
            cfg.eps, cfg.hbar
        ));
    }
    smoothed_inner(j, tau, cfg.eps, cfg.hbar, Variant::SmoothedRegularized)
}

/// Builds the requested variant.
pub fn approximate(variant: Variant, j: f64, tau: f64, cfg: &ApproxConfig) -> Result<ChainParams> {
    match variant {
        Variant::Erlang => erlang_approx(j, tau),
        Variant::Fixed => fixed_hypoexp(j, tau),
        Variant::Smoothed => smoothed_hypoexp(j, tau),
        Variant::SmoothedRegularized => regularized_smoothed(j, tau, cfg),
    }
}

/// Ratio of the fastest rate to the mean stage rate `n/τ`.
pub fn stiffness_ratio(params: &ChainParams) -> f64 {
    params.max_rate() * params.tau / params.n as f64
}

/// True when the chain's fastest stage exceeds the configured stiffness ratio.
pub fn stiffness_check(params: &ChainParams, cfg: &ApproxConfig) -> bool {
    stiffness_ratio(params) > cfg.stiffness_threshold
}
