//! Build a tail-adapted admissible weight from a frequency spectrum and
//! inspect the induced `phi`: admissibility, growth constants, and the
//! two-sided equivalence between `phi` and the plain `kappa` symbol.

use muskat_lab::weights::{
    build_weight_from_spectrum, default_radii, equivalence_constants, log_spaced,
    phi_from_kappa, validate_admissible, weight_growth_check,
};

fn main() -> muskat_lab::Result<()> {
    // omega(rho) = rho^4 |fhat(rho)|^2 rho for a Gaussian profile
    let radii = log_spaced(1e-2, 40.0, 400);
    let spectrum: Vec<(f64, f64)> =
        radii.iter().map(|&r| (r, r.powi(4) * (-r * r).exp() * r)).collect();
    let w = build_weight_from_spectrum(&spectrum)?;
    println!("{}", w.to_spec_text());

    let rep = validate_admissible(&w, &default_radii());
    println!("admissible: {}", if rep.pass() { "pass" } else { "FAIL" });

    for sigma in [0.25, 0.5, 1.0, 2.0] {
        let g = weight_growth_check(&w, sigma)?;
        println!(
            "sigma {sigma:4}: C_sigma {:.4}   C_sigma (kappa^2) {:.4}",
            g.c_sigma, g.c_sigma_sq
        );
    }

    let phi = phi_from_kappa(&w, &log_spaced(1e-3, 1e6, 60))?;
    let (c, cc) = equivalence_constants(&phi);
    println!("phi equivalence: c = {c:.4}, C = {cc:.4}, ratio {:.4}", cc / c);
    Ok(())
}
