//! Gamma and hypoexponential kernels, and the seeded samplers.

use gamma_dde::distributions::{sample_equilibrium_gamma, sample_gamma};
use gamma_dde::{GammaKernel, HypoexpKernel, Rng};

fn main() -> gamma_dde::Result<()> {
    let g = GammaKernel::with_mean(2.5, 1.0)?;
    let hx = HypoexpKernel::new(vec![3.0, 2.0, 7.5])?;
    println!(
        "gamma: mean {} var {} pdf(1) {:.10} S(1) {:.10} M(0.5) {:.10}",
        g.mean(),
        g.variance(),
        g.pdf(1.0)?,
        g.survival(1.0)?,
        g.mgf(0.5)?
    );
    println!(
        "hypoexp: mean {:.6} var {:.6} pdf(1) {:.10} S(1) {:.10}",
        hx.mean(),
        hx.variance(),
        hx.pdf(1.0)?,
        hx.survival(1.0)?
    );

    let mut rng = Rng::seeded(42);
    let n = 100_000;
    let draws: Vec<f64> = (0..n).map(|_| sample_gamma(&mut rng, &g)).collect();
    let eq: Vec<f64> = (0..n).map(|_| sample_equilibrium_gamma(&mut rng, &g)).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    println!(
        "sample mean {:.4} (1), equilibrium sample mean {:.4} ({:.4})",
        mean(&draws),
        mean(&eq),
        (1.0 + 1.0 / 2.5) / 2.0
    );
    Ok(())
}
