//! The eigenfunction problem X' = -aX + βI has the exact solution e^{λt}.

use gamma_dde::problems::EigenProblem;
use gamma_dde::{fcrk4_solve, QuadConfig};

fn main() -> gamma_dde::Result<()> {
    for (tau, j, beta) in [(4.65, 2.15, 0.5), (3.76, 3.70, 0.35), (4.25, 2.25, 0.71)] {
        let e = EigenProblem::new(tau, j, beta)?;
        print!("(τ, j, β) = ({tau}, {j}, {beta})  λ = {:+.12}  ", e.lambda);
        for h in [0.1, 0.025] {
            let sol = fcrk4_solve(&e.dde(10.0)?, h, &QuadConfig::for_step(h))?;
            let err = sol
                .times()
                .iter()
                .enumerate()
                .map(|(n, &t)| (sol.mesh_value(n)[0] - e.exact(t)).abs())
                .fold(0.0, f64::max);
            print!("  h = {h}: {err:.2e}");
        }
        println!();
    }
    Ok(())
}
