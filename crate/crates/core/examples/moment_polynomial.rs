//! Real roots of the moment-matching polynomials f_m.

use gamma_dde::analysis::moment_poly::DEFAULT_IMAG_TOL;
use gamma_dde::analysis::{fm_polynomial, gm_checks};

fn main() -> gamma_dde::Result<()> {
    let fj = 0.37;
    for m in 1..=8 {
        let p = fm_polynomial(m, fj)?;
        let roots = p.real_roots(DEFAULT_IMAG_TOL)?;
        println!("m = {m}: real roots {roots:.6?}  g_m identities hold: {}", gm_checks(m, fj)?.passed());
    }
    Ok(())
}
