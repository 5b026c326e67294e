//! Two routes to the fractional Sobolev seminorm: the lattice Gagliardo
//! double integral (polar quadrature with analytic head/tail complements)
//! against the spectral `|xi|^s` multiplier norm. The ratio is a constant
//! depending only on `s`, not on the field; at `s = 1/2` it is `4 pi`.

use muskat_lab::field::{random_band_limited, sobolev_norm};
use muskat_lab::grid::Grid;
use muskat_lab::quadrature::{gagliardo_seminorm, QuadratureSpec};
use rand::SeedableRng;

fn main() -> muskat_lab::Result<()> {
    let grid = Grid::new(64, 32.0)?;
    let q = QuadratureSpec::reference(grid);
    let mut rng = rand::rngs::StdRng::seed_from_u64(42);

    for s in [0.3, 0.5, 0.7] {
        print!("s = {s}:");
        for _ in 0..3 {
            let f = random_band_limited(grid, 10, 0.3, &mut rng);
            let (gag, low_confidence) = gagliardo_seminorm(&f, s, &q)?;
            let spectral = sobolev_norm(&f.transform(), s, |_| 1.0);
            print!(
                "   ratio^2 {:.6}{}",
                (gag / spectral).powi(2),
                if low_confidence { " (low confidence)" } else { "" }
            );
        }
        println!();
    }
    println!("s = 1/2 closed form: 4 pi = {:.6}", 4.0 * std::f64::consts::PI);
    Ok(())
}
