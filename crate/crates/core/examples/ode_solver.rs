//! The fixed-step and adaptive Runge-Kutta integrators used for the chains.

use gamma_dde::ode::{integrate, rk4_fixed, OdeConfig, Tolerances};

fn main() -> gamma_dde::Result<()> {
    let decay = |_: f64, y: &[f64], dy: &mut [f64]| dy[0] = -y[0];
    let rk4 = rk4_fixed(decay, &[1.0], 0.0, 1.0, 0.01)?;
    let (_, y) = rk4.last().unwrap();
    println!("rk4, h = 0.01:  y(1) = {:.15}  error {:.2e}", y[0], (y[0] - (-1f64).exp()).abs());

    // harmonic oscillator with the adaptive pair
    let osc = |_: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = y[1];
        dy[1] = -y[0];
    };
    let times: Vec<f64> = (1..=4).map(|k| k as f64 * std::f64::consts::FRAC_PI_2).collect();
    let traj = integrate(osc, &[1.0, 0.0], 0.0, &times, &OdeConfig::adaptive(Tolerances::uniform(1e-10)))?;
    for (t, y) in traj.times.iter().zip(&traj.states) {
        println!("t = {t:.4}: ({:+.10}, {:+.10})", y[0], y[1]);
    }
    Ok(())
}
