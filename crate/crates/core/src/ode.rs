//! Explicit one-step integrators for ODE systems `y' = f(t, y)`.
//!
//! [`rk4_fixed`] is the classical four stage method on a uniform mesh.
//! [`rk45_adaptive`] is the Dormand-Prince 5(4) pair with a PI step size
//! controller; requested output times are hit exactly by clipping the step.

use crate::error::{invalid, Error, Result};

/// Tolerances and step bounds for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
}

impl Tolerances {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, h_init: 1e-3, h_min: 1e-14, h_max: f64::INFINITY }
    }

    /// `rtol = atol = tol`.
    pub fn uniform(tol: f64) -> Self {
        Self::new(tol, tol)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return invalid("rtol and atol must be positive");
        }
        if !(self.h_min > 0.0 && self.h_min <= self.h_init && self.h_init <= self.h_max) {
            return invalid("step bounds must satisfy 0 < h_min <= h_init <= h_max");
        }
        Ok(())
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::uniform(1e-10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepMode {
    Fixed(f64),
    Adaptive(Tolerances),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeConfig {
    pub mode: StepMode,
    pub max_steps: usize,
}

impl OdeConfig {
    pub fn fixed(h: f64) -> Self {
        Self { mode: StepMode::Fixed(h), max_steps: 10_000_000 }
    }

    pub fn adaptive(tol: Tolerances) -> Self {
        Self { mode: StepMode::Adaptive(tol), max_steps: 10_000_000 }
    }
}

/// States recorded at a sequence of times.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Time series of a single state component.
    pub fn component(&self, index: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[index]).collect()
    }

    pub fn last(&self) -> Option<(f64, &[f64])> {
        self.times.last().map(|&t| (t, self.states.last().unwrap().as_slice()))
    }
}

/// Integrates with the configured mode and records the state at `output_times`.
///
/// In fixed mode the mesh is `t0 + k h`; every output time must lie on it.
pub fn integrate<F>(rhs: F, y0: &[f64], t0: f64, output_times: &[f64], cfg: &OdeConfig) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    match cfg.mode {
        StepMode::Fixed(h) => {
            let t_end = output_times.last().copied().unwrap_or(t0);
            let full = rk4_fixed(rhs, y0, t0, t_end, h)?;
            let mut out = Trajectory::default();
            for &t in output_times {
                let k = ((t - t0) / h).round() as usize;
                if k >= full.len() || (full.times[k] - t).abs() > 1e-9 * h.max(1.0) {
                    return invalid(format!("output time {t} is not on the fixed mesh"));
                }
                out.times.push(t);
                out.states.push(full.states[k].clone());
            }
            Ok(out)
        }
        StepMode::Adaptive(tol) => rk45_adaptive(rhs, y0, t0, output_times, &tol, cfg.max_steps),
    }
}

/// Classical RK4 on the mesh `t0 + k h`, `k = 0..=N`, with `N = round((t_end - t0) / h)`.
pub fn rk4_fixed<F>(mut rhs: F, y0: &[f64], t0: f64, t_end: f64, h: f64) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    if !(h > 0.0) || !h.is_finite() {
        return invalid("step size must be positive");
    }
    if t_end < t0 {
        return invalid("t_end must not precede t0");
    }
    let steps = ((t_end - t0) / h).round() as usize;
    let dim = y0.len();
    let mut y = y0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let mut tmp = vec![0.0; dim];
    let mut traj = Trajectory { times: vec![t0], states: vec![y.clone()] };

    for n in 0..steps {
        let t = t0 + n as f64 * h;
        rhs(t, &y, &mut k1);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        rhs(t + 0.5 * h, &tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        rhs(t + 0.5 * h, &tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = y[i] + h * k3[i];
        }
        rhs(t + h, &tmp, &mut k4);
        for i in 0..dim {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: n + 1, t: t + h });
        }
        traj.times.push(t0 + (n + 1) as f64 * h);
        traj.states.push(y.clone());
    }
    Ok(traj)
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const PI_BETA: f64 = 0.04;
const PI_ALPHA: f64 = 0.2 - PI_BETA * 0.75;

/// Dormand-Prince 5(4) with PI step control. Records the state at each of
/// `output_times` (non-decreasing, all `>= t0`).
pub fn rk45_adaptive<F>(
    mut rhs: F,
    y0: &[f64],
    t0: f64,
    output_times: &[f64],
    tol: &Tolerances,
    max_steps: usize,
) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    tol.validate()?;
    if output_times.iter().any(|&t| t < t0) || output_times.windows(2).any(|w| w[1] < w[0]) {
        return invalid("output times must be non-decreasing and not precede t0");
    }
    let dim = y0.len();
    let mut traj = Trajectory::default();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut next = 0;
    while next < output_times.len() && output_times[next] <= t0 {
        traj.times.push(output_times[next]);
        traj.states.push(y.clone());
        next += 1;
    }
    if next == output_times.len() {
        return Ok(traj);
    }

    let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; dim]);
    let mut tmp = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];
    rhs(t, &y, &mut k[0]);

    let mut h = tol.h_init.min(tol.h_max);
    let mut err_prev: f64 = 1e-4;
    let mut steps = 0usize;

    while next < output_times.len() {
        if steps >= max_steps {
            return Err(Error::MaxStepsExceeded(max_steps));
        }
        let target = output_times[next];
        let remaining = target - t;
        let clipped = h >= remaining;
        let step = if clipped { remaining } else { h };

        for i in 0..dim {
            tmp[i] = y[i] + step * A21 * k[0][i];
        }
        rhs(t + C2 * step, &tmp, &mut k[1]);
        for i in 0..dim {
            tmp[i] = y[i] + step * (A31 * k[0][i] + A32 * k[1][i]);
        }
        rhs(t + C3 * step, &tmp, &mut k[2]);
        for i in 0..dim {
            tmp[i] = y[i] + step * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
        }
        rhs(t + C4 * step, &tmp, &mut k[3]);
        for i in 0..dim {
            tmp[i] = y[i] + step * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
        }
        rhs(t + C5 * step, &tmp, &mut k[4]);
        for i in 0..dim {
            tmp[i] = y[i] + step * (A61 * k[0][i] + A62 * k[1][i] + A63 * k[2][i] + A64 * k[3][i] + A65 * k[4][i]);
        }
        rhs(t + step, &tmp, &mut k[5]);
        for i in 0..dim {
            y_new[i] = y[i] + step * (A71 * k[0][i] + A73 * k[2][i] + A74 * k[3][i] + A75 * k[4][i] + A76 * k[5][i]);
        }
        rhs(t + step, &y_new, &mut k[6]);

        let mut err_sq = 0.0;
        for i in 0..dim {
            let e = step * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
            let scale = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / scale).powi(2);
        }
        let err = (err_sq / dim.max(1) as f64).sqrt();
        steps += 1;

        if !err.is_finite() {
            h = step * FAC_MIN;
            if h < tol.h_min {
                return Err(Error::NonFinite { step: steps, t });
            }
            continue;
        }

        if err <= 1.0 {
            t = if clipped { target } else { t + step };
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            let fac =
                (err.max(1e-10).powf(PI_ALPHA) / err_prev.powf(PI_BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let proposed = (step / fac).min(tol.h_max);
            // a clipped step says nothing about the natural step length
            h = if clipped { h.max(proposed) } else { proposed };
            err_prev = err.max(1e-4);
            while next < output_times.len() && output_times[next] <= t {
                traj.times.push(output_times[next]);
                traj.states.push(y.clone());
                next += 1;
            }
        } else {
            let fac = (err.powf(PI_ALPHA) / SAFETY).min(1.0 / FAC_MIN);
            h = step / fac;
            if h < tol.h_min {
                return Err(Error::StepSizeUnderflow { t, h });
            }
        }
    }
    Ok(traj)
}
