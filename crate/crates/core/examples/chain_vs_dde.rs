//! Gamma DDE against the ODE chains that approximate it.

use gamma_dde::approximations::approximate;
use gamma_dde::ode::{OdeConfig, Tolerances};
use gamma_dde::problems::{linear_chain, linear_dde};
use gamma_dde::{fcrk4_solve, ApproxConfig, HistoryFunction, InitMode, QuadConfig, Variant};

fn main() -> gamma_dde::Result<()> {
    let (j, t_end, h) = (2.57, 10.0, 0.02);
    let history = HistoryFunction::Exponential { c: 0.1, rho: 0.1 };
    let sol = fcrk4_solve(&linear_dde(j, 1.0, history.clone(), t_end)?, h, &QuadConfig::for_step(h))?;
    let times = sol.times();
    let x = sol.mesh_component(0);

    for v in [Variant::Erlang, Variant::Fixed, Variant::Smoothed] {
        let chain = linear_chain(
            approximate(v, j, 1.0, &ApproxConfig::default())?,
            history.clone(),
            t_end,
            InitMode::KernelConsistent,
        )?;
        let y = chain.solve(&times[1..], &OdeConfig::adaptive(Tolerances::uniform(1e-12)))?.component(0);
        let dev = y.iter().zip(&x[1..]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("{:<10} {} stages  max |chain - dde| = {dev:.3e}", v.name(), chain.dimension() - 1);
    }
    Ok(())
}
