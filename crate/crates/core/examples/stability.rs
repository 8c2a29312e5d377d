//! Near a Hopf point the Erlang chain can get the stability of the gamma DDE wrong.

use gamma_dde::analysis::{dominant_eigenvalue, growth_rate};
use gamma_dde::approximations::approximate;
use gamma_dde::problems::{gamma_dde, linear_rhs};
use gamma_dde::{fcrk4_solve, ApproxConfig, HistoryFunction, QuadConfig, Variant};

fn main() -> gamma_dde::Result<()> {
    for (j, alpha, beta) in [(2.5, 0.89, -1.15), (4.495, 0.825, -1.175)] {
        let h = 0.1;
        let problem = gamma_dde(linear_rhs(alpha, beta), j, 1.0, HistoryFunction::Constant(1.0), 400.0)?;
        let sol = fcrk4_solve(&problem, h, &QuadConfig::for_step(h))?;
        println!("j = {j}, α = {alpha}, β = {beta}");
        println!("  gamma DDE envelope growth {:+.5}", growth_rate(&sol.times(), &sol.mesh_component(0))?);
        for v in [Variant::Fixed, Variant::Smoothed, Variant::Erlang] {
            let lam = dominant_eigenvalue(alpha, beta, &approximate(v, j, 1.0, &ApproxConfig::default())?)?;
            println!("  {:<9} Re λ = {:+.5}", v.name(), lam.re);
        }
    }
    Ok(())
}
