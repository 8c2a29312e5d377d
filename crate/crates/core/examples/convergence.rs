//! Observed order of the FCRK method on the nonlinear test problem.

use gamma_dde::analysis::{fcrk_convergence, logistic_test_reference, ErrorNorm};
use gamma_dde::problems::{logistic_dde, LOGISTIC_TAU};
use gamma_dde::quadrature::DEFAULT_XI;
use gamma_dde::HistoryFunction;

fn main() -> gamma_dde::Result<()> {
    let steps = [0.1, 0.05, 0.025, 0.0125];
    for j in [3.0, 8.0] {
        let problem = logistic_dde(j, LOGISTIC_TAU, HistoryFunction::Constant(1.0), 10.0)?;
        let report =
            fcrk_convergence(&problem, &steps, DEFAULT_XI, ErrorNorm::Discrete, |t| logistic_test_reference(j, t))?;
        println!("j = {j}");
        for (h, e) in &report.points {
            println!("  h = {h:<7} E = {e:.3e}");
        }
        println!("  slope {:.3}", report.slope);
    }
    Ok(())
}
