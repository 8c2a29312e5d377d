//! How fast the MGF of each approximation approaches the gamma MGF as φ → 0.

use gamma_dde::analysis::{mgf_error, mgf_error_order};
use gamma_dde::approximations::approximate;
use gamma_dde::{ApproxConfig, Variant};

fn main() -> gamma_dde::Result<()> {
    for j in [1.5, 2.5, 3.0, 6.7] {
        print!("j = {j:<4}");
        for v in [Variant::Erlang, Variant::Fixed, Variant::Smoothed] {
            match mgf_error_order(j, 1.0, v)? {
                Some(p) => print!("  {}: {p:.3}", v.name()),
                None => print!("  {}: exact", v.name()),
            }
        }
        println!();
    }
    let p = approximate(Variant::Fixed, 2.5, 1.0, &ApproxConfig::default())?;
    println!("fixed, j = 2.5, φ = 0.05: |ΔMGF| = {:.3e}", mgf_error(&p, 0.05));
    Ok(())
}
