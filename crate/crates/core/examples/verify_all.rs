//! Run every verification suite at a modest resolution and print the tables.
//! At this scale the slope and exact-symmetry checks are meaningful; the
//! 1e-3 identity contracts are stated at the reference resolution (n = 128).

use muskat_lab::grid::Grid;
use muskat_lab::quadrature::QuadratureSpec;
use muskat_lab::verify::{run_suite, VerifyConfig, ALL_SUITES};

fn main() -> muskat_lab::Result<()> {
    let grid = Grid::new(48, 32.0)?;
    let cfg = VerifyConfig {
        grid,
        quad: QuadratureSpec::with_cells(grid, 32, 16, 0.01, 0.5)?,
        seed: 1,
        family: 4,
    };
    let mut all = true;
    for id in ALL_SUITES {
        let rep = run_suite(id, &cfg)?;
        print!("{}", rep.to_table());
        all &= rep.pass();
    }
    println!("\nall suites: {}", if all { "pass" } else { "FAIL" });
    Ok(())
}
