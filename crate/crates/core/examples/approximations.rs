//! Erlang and hypoexponential stand-ins for a gamma kernel.

use gamma_dde::approximations::{approximate, stiffness_ratio};
use gamma_dde::{ApproxConfig, Variant};

fn main() -> gamma_dde::Result<()> {
    let (tau, cfg) = (1.0, ApproxConfig::default());
    for j in [2.57, 3.0, 3.999, 6.45] {
        println!("j = {j}  (target mean {tau}, variance {:.6})", tau * tau / j);
        for v in Variant::ALL {
            let p = approximate(v, j, tau, &cfg)?;
            let rates = p.rates();
            println!(
                "  {:<22} n = {:<2} mean {:.12} var {:.12} stiffness {:>8.2}  last rates {:?}",
                v.name(),
                rates.len(),
                p.mean(),
                p.variance(),
                stiffness_ratio(&p),
                &rates[rates.len().saturating_sub(2)..]
            );
        }
    }
    Ok(())
}
