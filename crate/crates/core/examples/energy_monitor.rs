//! Energy diagnostics of a single state: the weighted energies A/B/Z, the
//! interpolation ratio, the Lipschitz probe, and the dissipation pairing
//! whose ratio to `B_phi` tends to 1 as the amplitude shrinks.

use muskat_lab::diagnostics::{
    dissipation_pairing, interpolation_probe, lipschitz_probe, record,
};
use muskat_lab::field::{sobolev_norm, RealField};
use muskat_lab::grid::Grid;
use muskat_lab::quadrature::QuadratureSpec;
use muskat_lab::weights::{phi_table_for_grid, Weight};

fn gaussian(grid: Grid, amp: f64) -> RealField {
    let s = grid.l / 14.0;
    RealField::from_fn(grid, |x, y| {
        let (u, v) = (x - grid.l / 2.0, y - grid.l / 2.0);
        amp * (-(u * u + v * v) / (2.0 * s * s)).exp()
    })
}

fn main() -> muskat_lab::Result<()> {
    let grid = Grid::new(64, 32.0)?;
    let w = Weight::log_pow(0.375)?;
    let q = QuadratureSpec::reference(grid);

    let f = gaussian(grid, 0.5);
    let r = record(&f, &w, &q, 0.0)?;
    println!("A_phi {:.5e}   B_phi {:.5e}   Z_phi {:.5e}", r.a_phi, r.b_phi, r.z_phi);
    println!("mu_phi {:.5e}   sup {:.4e}   lip {:.4e}", r.mu_phi, r.sup_f, r.lip_f);
    println!("interpolation ratio (s = 9/4): {:.6}", interpolation_probe(&f, &w, 2.25)?);
    let lp = lipschitz_probe(&f, &w);
    println!("lipschitz probe: lip {:.4e} vs bound {:.4e} (ratio {:.4})", lp.lip, lp.bound, lp.ratio);

    let phi = phi_table_for_grid(&w, grid);
    println!("dissipation / B_phi under amplitude halving:");
    for amp in [1e-3, 1e-4, 1e-5] {
        let f = gaussian(grid, amp);
        let d = dissipation_pairing(&f, &w, &q)?;
        let b = sobolev_norm(&f.transform(), 2.5, |r| phi.eval(r)).powi(2);
        println!("  amplitude {amp:>6.0e}: ratio {:.6}", d / b);
    }
    Ok(())
}
