//! Difference-kernel multipliers: the first-order kernel with `b = 1/2`
//! reproduces `4 pi |xi|` independent of direction, and the Taylor-removed
//! kernel scales as `|xi|^{2b}`.

use muskat_lab::diagnostics::{difference_kernel_multiplier, DiffOrder, KernelSpec};
use muskat_lab::weights::Weight;

fn main() -> muskat_lab::Result<()> {
    let first =
        KernelSpec { order: DiffOrder::First, b: 0.5, kappa_pow: 0, weight: Weight::unit() };
    let xi = [(0.5, 0.0), (0.0, 2.0), (1.3, -0.7), (4.0, 4.0)];
    println!(
        "first-order kernel, b = 1/2 (expect m / |xi| = 4 pi = {:.8}):",
        4.0 * std::f64::consts::PI
    );
    for (&(x, y), m) in xi.iter().zip(difference_kernel_multiplier(&first, &xi)?) {
        let rho = (x * x + y * y).sqrt();
        println!("  xi = ({x:5.2}, {y:5.2})   m/|xi| = {:.8}", m / rho);
    }

    let taylor = KernelSpec {
        order: DiffOrder::TaylorRemoved,
        b: 1.25,
        kappa_pow: 0,
        weight: Weight::unit(),
    };
    let pts = [(0.25, 0.0), (0.5, 0.0), (1.0, 0.0), (2.0, 0.0), (4.0, 0.0)];
    let m = difference_kernel_multiplier(&taylor, &pts)?;
    println!("taylor-removed kernel, b = 5/4 (expect local slope 2b = 2.5):");
    for w in m.windows(2) {
        println!("  slope {:.6}", (w[1] / w[0]).log2());
    }
    Ok(())
}
