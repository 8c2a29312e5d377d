//! Gamma survival against the hypoexponential approximations, and their jumps at integer j.

use gamma_dde::analysis::{integer_jump, survival_compare};

fn main() -> gamma_dde::Result<()> {
    println!("{:>4} {:>12} {:>12} {:>12}", "t", "gamma", "fixed", "smoothed");
    for t in [0.5, 1.0, 2.0, 4.0] {
        let (u, yf, ys) = survival_compare(2.5, 1.0, t)?;
        println!("{t:>4} {u:>12.8} {yf:>12.8} {ys:>12.8}");
    }
    for j0 in [2.0, 3.0, 4.0] {
        let (f, s) = integer_jump(j0, 1.0, 4.0, 1e-6)?;
        println!("jump across j = {j0}: fixed {f:.3e}, smoothed {s:.3e}");
    }
    Ok(())
}
