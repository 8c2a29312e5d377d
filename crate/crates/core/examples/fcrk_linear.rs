//! Solve the linear test problem at j = 1 and compare against its closed form.

use gamma_dde::analysis::reference::linear_j1_closed_form;
use gamma_dde::problems::linear_dde;
use gamma_dde::{fcrk4_solve, HistoryFunction, QuadConfig};

fn main() -> gamma_dde::Result<()> {
    let h = 0.05;
    let problem = linear_dde(1.0, 1.0, HistoryFunction::Constant(1.0), 10.0)?;
    let sol = fcrk4_solve(&problem, h, &QuadConfig::for_step(h))?;

    println!("{:>6} {:>14} {:>10}", "t", "x", "error");
    for t in [1.0, 2.5, 5.0, 7.5, 10.0] {
        let x = sol.query_scalar(t)?;
        println!("{t:>6.2} {x:>14.10} {:>10.2e}", (x - linear_j1_closed_form(t)).abs());
    }
    // the dense output is available between mesh points too
    println!("x(3.3) = {:.10}", sol.query_scalar(3.3)?);
    Ok(())
}
