//! The benchmark equations used throughout the crate.
//!
//! * linear: `X' = 0.8 X - 1.1 I`
//! * nonlinear (logistic): `X' = X (1 - I/K)` with `K = 2`
//! * eigenfunction: `X' = -a X + β I`, exact solution `e^{λt}` for history `e^{λs}`

use std::sync::Arc;

use crate::approximations::ChainParams;
use crate::chain::{ChainOdeProblem, HistoryFunction, InitMode, ScalarRhs};
use crate::distributions::GammaKernel;
use crate::error::{invalid, Result};
use crate::fcrk::DdeProblem;

pub const LINEAR_ALPHA: f64 = 0.8;
pub const LINEAR_BETA: f64 = -1.1;
pub const LOGISTIC_K: f64 = 2.0;
pub const LOGISTIC_TAU: f64 = 2.25;

/// `F(x, I) = αx + βI`.
pub fn linear_rhs(alpha: f64, beta: f64) -> ScalarRhs {
    Arc::new(move |x, i| alpha * x + beta * i)
}

pub fn logistic_rhs(k: f64) -> ScalarRhs {
    Arc::new(move |x, i| x * (1.0 - i / k))
}

/// Scalar gamma distributed DDE with mean delay `tau` and shape `j`.
pub fn gamma_dde(rhs: ScalarRhs, j: f64, tau: f64, history: HistoryFunction, t_end: f64) -> Result<DdeProblem> {
    DdeProblem::scalar(move |x, i| rhs(x, i), GammaKernel::with_mean(j, tau)?, history, 0.0, t_end)
}

pub fn linear_dde(j: f64, tau: f64, history: HistoryFunction, t_end: f64) -> Result<DdeProblem> {
    gamma_dde(linear_rhs(LINEAR_ALPHA, LINEAR_BETA), j, tau, history, t_end)
}

pub fn logistic_dde(j: f64, tau: f64, history: HistoryFunction, t_end: f64) -> Result<DdeProblem> {
    gamma_dde(logistic_rhs(LOGISTIC_K), j, tau, history, t_end)
}

pub fn linear_chain(
    params: ChainParams,
    history: HistoryFunction,
    t_end: f64,
    mode: InitMode,
) -> Result<ChainOdeProblem> {
    ChainOdeProblem::build(linear_rhs(LINEAR_ALPHA, LINEAR_BETA), params, history, 0.0, t_end, mode)
}

pub fn logistic_chain(
    params: ChainParams,
    history: HistoryFunction,
    t_end: f64,
    mode: InitMode,
) -> Result<ChainOdeProblem> {
    ChainOdeProblem::build(logistic_rhs(LOGISTIC_K), params, history, 0.0, t_end, mode)
}

/// `X' = -a X + β I` with `a = j/τ`, whose history `e^{λs}` continues as `e^{λt}`
/// when `(λ + a)^{j+1} = β a^j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenProblem {
    pub tau: f64,
    pub j: f64,
    pub beta: f64,
    pub a: f64,
    pub lambda: f64,
}

impl EigenProblem {
    pub fn new(tau: f64, j: f64, beta: f64) -> Result<Self> {
        let lambda = char_root(tau, j, beta)?;
        Ok(Self { tau, j, beta, a: j / tau, lambda })
    }

    pub fn dde(&self, t_end: f64) -> Result<DdeProblem> {
        gamma_dde(
            linear_rhs(-self.a, self.beta),
            self.j,
            self.tau,
            HistoryFunction::Exponential { c: 1.0, rho: self.lambda },
            t_end,
        )
    }

    pub fn exact(&self, t: f64) -> f64 {
        (self.lambda * t).exp()
    }

    /// `λ - α - β a^j / (a + λ)^j` with `α = -a`.
    pub fn residual(&self) -> f64 {
        let a = self.a;
        self.lambda + a - self.beta * (a / (a + self.lambda)).powf(self.j)
    }
}

/// Principal real root `λ = (β a^j)^{1/(j+1)} - a`, `a = j/τ`, of the
/// characteristic equation of `X' = -aX + βI`.
pub fn char_root(tau: f64, j: f64, beta: f64) -> Result<f64> {
    if !(tau > 0.0 && j > 0.0) {
        return invalid(format!("need τ > 0 and j > 0 (got {tau}, {j})"));
    }
    let a = j / tau;
    if !(beta > 0.0 && beta < 2f64.powf(j + 1.0) * a) {
        return invalid(format!("need 0 < β < 2^(j+1) a = {} (got {beta})", 2f64.powf(j + 1.0) * a));
    }
    // (β a^j)^{1/(j+1)} = a (β/a)^{1/(j+1)}
    Ok(a * ((beta / a).powf(1.0 / (j + 1.0)) - 1.0))
}
