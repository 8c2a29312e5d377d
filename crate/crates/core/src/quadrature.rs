//! Evaluation of the infinite-delay convolution `∫₀^∞ X(t - s) g(s) ds`.
//!
//! The lag `s ∈ [0, ∞)` is mapped to `ω ∈ (0, 1]` through
//! `ω = exp(-s^{1/β} / α)`, so that
//!
//! ```text
//! ∫₀^∞ X(t - s) g(s) ds = ∫₀¹ u(t, ω) dω,
//! u(t, ω) = β α^{βj} a^j / Γ(j) · X(t - (-α ln ω)^β) · e^{-a(-α ln ω)^β} · (-ln ω)^{βj-1} / ω.
//! ```
//!
//! With `β = (k+1)/j + 1` and `α = (j+1)/a^{1/β}` the integrand is `k` times
//! differentiable with a bounded `k`-th derivative on `[0, 1]`, and the
//! transformed integral is evaluated with the composite open Simpson rule,
//! which never touches the singular end points.

use crate::distributions::GammaKernel;
use crate::error::{domain, Result};
use crate::special::ln_gamma;

/// Smoothness order used by default when choosing the transform.
pub const DEFAULT_SMOOTHNESS: u32 = 4;

/// Default coupling constant `ξ` in `h_int⁴ = ξ h⁴`.  Small enough that the
/// quadrature error stays below the time-stepping error of the benchmark problems.
pub const DEFAULT_XI: f64 = 1e-8;

/// Change-of-variables parameters `α`, `β` and the smoothness order `k` they were chosen for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformParams {
    pub alpha: f64,
    pub beta: f64,
    pub k: u32,
}

/// `β = (k+1)/j + 1`, `α = (j+1) / a^{1/β}`.
pub fn select_transform_params(j: f64, a: f64, k: u32) -> TransformParams {
    let beta = (k as f64 + 1.0) / j + 1.0;
    let alpha = (j + 1.0) / a.powf(1.0 / beta);
    TransformParams { alpha, beta, k }
}

/// Quadrature settings for the FCRK convolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    /// Coupling constant in `h_int^q = ξ h^p`.
    pub xi: f64,
    /// Composite open Simpson panels covering `[0, 1]`.
    pub panels: usize,
    /// Minimum distance kept between a quadrature node and an FCRK mesh point.
    pub jitter: f64,
}

impl QuadConfig {
    /// Panels coupled to the FCRK step `h` with `p = q = 4`; jitter `1e-9 h`.
    pub fn coupled(h: f64, xi: f64) -> Self {
        Self { xi, panels: couple_stepsizes(h, xi, 4, 4), jitter: 1e-9 * h }
    }

    /// [`QuadConfig::coupled`] with [`DEFAULT_XI`].
    pub fn for_step(h: f64) -> Self {
        Self::coupled(h, DEFAULT_XI)
    }

    pub fn with_panels(panels: usize) -> Self {
        Self { xi: 1.0, panels: panels.max(1), jitter: 0.0 }
    }

    /// Width of the open Simpson sub-interval, `1 / (4 panels)`.
    pub fn h_int(&self) -> f64 {
        0.25 / self.panels as f64
    }
}

/// Panel count realising `h_int = ξ^{1/q} h^{p/q}` on `[0, 1]`.
pub fn couple_stepsizes(h: f64, xi: f64, p: u32, q: u32) -> usize {
    let h_int = xi.powf(1.0 / q as f64) * h.powf(p as f64 / q as f64);
    let raw = 1.0 / (4.0 * h_int);
    // guard against 5.000000000000001 style rounding
    ((raw - 1e-9).ceil() as usize).max(1)
}

/// Composite open Simpson rule on `[a, b]`:
/// each panel contributes `(4h/3)(2f(a+h) - f(a+2h) + 2f(a+3h))` with `h` a quarter panel.
pub fn open_simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let hq = 0.25 * width;
    let mut sum = 0.0;
    for p in 0..panels {
        let left = a + p as f64 * width;
        sum += 2.0 * f(left + hq) - f(left + 2.0 * hq) + 2.0 * f(left + 3.0 * hq);
    }
    sum * 4.0 * hq / 3.0
}

pub fn open_simpson_unit<F: FnMut(f64) -> f64>(f: F, panels: usize) -> f64 {
    open_simpson(f, 0.0, 1.0, panels)
}

/// A quadrature node in lag space: contributes `weight · X(t - lag)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub lag: f64,
    pub weight: f64,
}

/// The gamma kernel expressed in the transformed variable `ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelTransform {
    kernel: GammaKernel,
    params: TransformParams,
    log_norm: f64,
}

impl KernelTransform {
    pub fn new(kernel: GammaKernel) -> Self {
        Self::with_params(kernel, select_transform_params(kernel.shape(), kernel.rate(), DEFAULT_SMOOTHNESS))
    }

    pub fn with_params(kernel: GammaKernel, params: TransformParams) -> Self {
        let (j, a) = (kernel.shape(), kernel.rate());
        let log_norm = params.beta.ln() + params.beta * j * params.alpha.ln() + j * a.ln() - ln_gamma(j);
        Self { kernel, params, log_norm }
    }

    pub fn kernel(&self) -> &GammaKernel {
        &self.kernel
    }

    pub fn params(&self) -> &TransformParams {
        &self.params
    }

    /// Lag `s = (-α ln ω)^β`.
    pub fn lag(&self, omega: f64) -> f64 {
        (-self.params.alpha * omega.ln()).powf(self.params.beta)
    }

    /// Inverse map `ω = exp(-s^{1/β} / α)`.
    pub fn omega(&self, lag: f64) -> f64 {
        (-lag.powf(1.0 / self.params.beta) / self.params.alpha).exp()
    }

    /// `u(t, ω) / X(t - s(ω))`.
    pub fn weight(&self, omega: f64) -> f64 {
        let y = -omega.ln();
        if y <= 0.0 {
            return 0.0;
        }
        let j = self.kernel.shape();
        let beta = self.params.beta;
        let lag = (self.params.alpha * y).powf(beta);
        let log_w = self.log_norm - self.kernel.rate() * lag + (beta * j - 1.0) * y.ln() + y;
        log_w.exp()
    }

    /// Quadrature nodes for the convolution at a time `span = t - t₀` after the
    /// start of the history.  For `span > 0` the `ω` domain is split at
    /// `ω(t, t₀)` so that `t₀` is a panel boundary; each part gets its share of
    /// `panels` (at least one).
    pub fn nodes(&self, span: f64, panels: usize) -> Vec<Node> {
        let mut out = Vec::with_capacity(3 * (panels + 2));
        if span > 0.0 && span.is_finite() {
            let split = self.omega(span);
            let hist_panels = ((split * panels as f64).ceil() as usize).max(1);
            let sol_panels = (((1.0 - split) * panels as f64).ceil() as usize).max(1);
            if split > 0.0 {
                self.push_nodes(&mut out, 0.0, split, hist_panels);
            }
            if split < 1.0 {
                self.push_nodes(&mut out, split, 1.0, sol_panels);
            }
        } else {
            self.push_nodes(&mut out, 0.0, 1.0, panels.max(1));
        }
        out
    }

    fn push_nodes(&self, out: &mut Vec<Node>, a: f64, b: f64, panels: usize) {
        let width = (b - a) / panels as f64;
        let hq = 0.25 * width;
        let scale = 4.0 * hq / 3.0;
        for p in 0..panels {
            let left = a + p as f64 * width;
            for (offset, w) in [(1.0, 2.0), (2.0, -1.0), (3.0, 2.0)] {
                let omega = left + offset * hq;
                let kw = self.weight(omega);
                if kw != 0.0 {
                    out.push(Node { lag: self.lag(omega), weight: scale * w * kw });
                }
            }
        }
    }

    /// `∫₀^∞ X(t - s) g(s) ds` by the split composite open rule.
    pub fn convolve<F: FnMut(f64) -> f64>(&self, t: f64, t0: f64, panels: usize, mut x: F) -> f64 {
        self.nodes(t - t0, panels).iter().map(|n| n.weight * x(t - n.lag)).sum()
    }
}

/// The transformed integrand `u(t, ω)` for a solution accessor `x`.
pub fn transformed_integrand<F: Fn(f64) -> f64>(t: f64, omega: f64, x: F, transform: &KernelTransform) -> Result<f64> {
    if !(omega > 0.0 && omega < 1.0) {
        return domain(format!("transformed integrand needs ω in (0, 1), got {omega}"));
    }
    let w = transform.weight(omega);
    if w == 0.0 {
        return Ok(0.0);
    }
    Ok(w * x(t - transform.lag(omega)))
}

// Gauss-Kronrod 7/15 abscissae and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = r * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * r, ((kron - gauss) * r).abs())
}

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Used for history integrals of general functions and as an independent check
/// of the open Simpson path.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> f64 {
    let mut stack = vec![(a, b, tol, 0u32)];
    let mut total = 0.0;
    while let Some((lo, hi, eps, depth)) = stack.pop() {
        let (value, err) = gk15(&mut f, lo, hi);
        if err <= eps.max(1e-300) || depth >= 48 || hi - lo <= 1e-14 * (1.0 + lo.abs()) {
            total += value;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, 0.5 * eps, depth + 1));
            stack.push((mid, hi, 0.5 * eps, depth + 1));
        }
    }
    total
}

/// `∫₀^∞ f(s) ds` through `s = x / (1 - x)`.
pub fn integrate_half_line<F: FnMut(f64) -> f64>(mut f: F, tol: f64) -> f64 {
    integrate_adaptive(
        |x| {
            let one_minus = 1.0 - x;
            let v = f(x / one_minus);
            if v == 0.0 {
                0.0
            } else {
                v / (one_minus * one_minus)
            }
        },
        0.0,
        1.0,
        tol,
    )
}
