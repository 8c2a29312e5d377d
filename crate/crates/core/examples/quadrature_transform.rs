//! The change of variables that maps the gamma kernel's half line onto (0, 1].

use gamma_dde::quadrature::{open_simpson, KernelTransform};
use gamma_dde::GammaKernel;

fn main() -> gamma_dde::Result<()> {
    for (j, a) in [(1.5, 1.5), (4.0, 4.0), (12.3, 2.0)] {
        let tr = KernelTransform::new(GammaKernel::new(j, a)?);
        let p = tr.params();
        print!("j = {j:<5} a = {a:<4} α = {:.4} β = {:.4}", p.alpha, p.beta);
        for panels in [4, 16, 64] {
            let mass: f64 = tr.nodes(f64::INFINITY, panels).iter().map(|n| n.weight).sum();
            print!("  |1 - Σw|({panels}) = {:.1e}", (1.0 - mass).abs());
        }
        println!();
    }

    // composite open Simpson on x⁴ converges at fourth order
    let exact = 0.2;
    let mut prev = f64::NAN;
    for panels in [2, 4, 8, 16] {
        let err = (open_simpson(|x| x.powi(4), 0.0, 1.0, panels) - exact).abs();
        println!("panels {panels:>2}: error {err:.3e}  ratio {:.2}", prev / err);
        prev = err;
    }
    Ok(())
}
