//! Simulate an epidemic with a gamma infectious period and recover its parameters.

use gamma_dde::epi::{log_likelihood, mle_fit, synthetic_data, FitBounds, SirParams};
use gamma_dde::optim::NelderMeadOptions;
use gamma_dde::Rng;

fn main() -> gamma_dde::Result<()> {
    let truth = SirParams::new(0.5, 5.0, 4.0, 1e-3);
    let data = synthetic_data(&truth, 100, &mut Rng::seeded(1))?;
    println!(
        "{} cases over {} days, {} serial intervals",
        data.cases.iter().sum::<u64>(),
        data.cases.len(),
        data.serial.len()
    );
    println!("log-likelihood at the truth {:.4}", log_likelihood(&truth, &data)?);

    let mut start = truth.clone();
    (start.beta, start.tau, start.j, start.eps) = (0.4, 4.0, 3.0, 2e-3);
    let fit = mle_fit(&data, &start, &FitBounds::default(), &NelderMeadOptions::default())?;
    println!(
        "fit: β = {:.4}  τ = {:.4}  j = {:.3}  ε = {:.2e}  loglik {:.4} after {} evaluations",
        fit.beta, fit.tau, fit.j, fit.eps, fit.loglik, fit.n_evals
    );
    Ok(())
}
