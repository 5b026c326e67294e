//! Radial cutoff bump `chi` and the mollifier built from it.
//!
//! `chi` is identically 1 on `[0, 1/4]`, descends through a quintic
//! smoothstep, and vanishes beyond a transition endpoint `S < 2` chosen so
//! that the 2D mass `2 pi int chi(r) r dr` is exactly 1. Fixing the mass by
//! the endpoint (rather than by amplitude) keeps the plateau value at 1,
//! which the cutoff nonlinearity requires.

use crate::field::MultiplierTable;
use crate::grid::Grid;
use crate::specfun::{adaptive_simpson, j0};
use crate::weights::MonotoneCubic;
use once_cell::sync::Lazy;

const PLATEAU: f64 = 0.25;

/// Transition endpoint: with q the descending quintic smoothstep,
/// `int_0^1 q = 1/2` and `int_0^1 q t dt = 1/7`, so the mass condition is a
/// quadratic in `u = S - 1/4`:
/// `2 pi [1/32 + u (1/8 + u/7)] = 1`.
pub static SUPPORT: Lazy<f64> = Lazy::new(|| {
    let c = 1.0 / (2.0 * std::f64::consts::PI) - 1.0 / 32.0;
    let disc = (1.0f64 / 64.0 + 4.0 * c / 7.0).sqrt();
    let u = (disc - 0.125) * 3.5;
    PLATEAU + u
});

/// Radial bump: 1 on `[0, 1/4]`, quintic descent, 0 beyond `SUPPORT`.
pub fn chi(r: f64) -> f64 {
    let s = *SUPPORT;
    if r <= PLATEAU {
        1.0
    } else if r >= s {
        0.0
    } else {
        let t = (r - PLATEAU) / (s - PLATEAU);
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

/// Fourier transform of the unit-mass radial bump:
/// `chi_hat(rho) = 2 pi int_0^S chi(r) J0(rho r) r dr`, so `chi_hat(0) = 1`.
pub fn chi_hat(rho: f64) -> f64 {
    let s = *SUPPORT;
    let rho = rho.abs();
    2.0 * std::f64::consts::PI
        * adaptive_simpson(&|r: f64| chi(r) * j0(rho * r) * r, 0.0, s, 1e-11)
}

/// Multiplier table of the mollifier `chi_eps(x) = eps^-2 chi(x/eps)`:
/// the symbol is `chi_hat(eps |xi|)`, tabulated on a radial profile.
pub fn mollifier_multiplier(grid: Grid, eps: f64) -> MultiplierTable {
    let hi = (eps * grid.xi_max()).max(1e-6) * 1.01;
    let m = 200;
    let xs: Vec<f64> = (0..m).map(|i| hi * i as f64 / (m - 1) as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| chi_hat(x)).collect();
    let interp = MonotoneCubic::new(&xs, &ys);
    MultiplierTable::radial(grid, |rho| interp.eval(eps * rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::RealField;

    #[test]
    fn plateau_support_and_smooth_join() {
        assert_eq!(chi(0.0), 1.0);
        assert_eq!(chi(0.25), 1.0);
        let s = *SUPPORT;
        assert!(s > 0.25 && s < 2.0, "S = {s}");
        assert_eq!(chi(s), 0.0);
        assert_eq!(chi(3.0), 0.0);
        // C^1 at both transition ends: finite-difference slope vanishes
        let d = 1e-6;
        assert!((chi(0.25 + d) - chi(0.25 - d)).abs() / (2.0 * d) < 1e-4);
        assert!((chi(s + d) - chi(s - d)).abs() / (2.0 * d) < 1e-4);
        // monotone descent
        let mut prev = 1.0;
        for i in 0..200 {
            let v = chi(0.25 + (s - 0.25) * i as f64 / 199.0);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn unit_mass_in_2d() {
        let mass = 2.0 * std::f64::consts::PI
            * adaptive_simpson(&|r: f64| chi(r) * r, 0.0, *SUPPORT, 1e-12);
        assert!((mass - 1.0).abs() < 1e-10, "mass = {mass}");
    }

    #[test]
    fn transform_normalization_and_decay() {
        assert!((chi_hat(0.0) - 1.0).abs() < 1e-7);
        assert!(chi_hat(0.5) < 1.0);
        assert!(chi_hat(0.5) > 0.9);
        // smooth bump: transform decays
        assert!(chi_hat(40.0).abs() < 1e-2);
    }

    #[test]
    fn mollifier_preserves_constants_and_damps_modes() {
        let g = Grid::new(32, 32.0).unwrap();
        let eps = 0.3;
        let m = mollifier_multiplier(g, eps);
        let f = RealField::from_fn(g, |_, _| 2.5);
        let out = f.transform().apply(&m).unwrap().inverse();
        for &v in &out.data {
            assert!((v - 2.5).abs() < 1e-6);
        }
        // single mode k: multiplied by chi_hat(eps |k|)
        let k = (2.0 * std::f64::consts::PI / g.l) * 3.0;
        let f = RealField::from_fn(g, |x, _| (k * x).cos());
        let out = f.transform().apply(&m).unwrap().inverse();
        let want = chi_hat(eps * k);
        let got = out.data[1] / f.data[1];
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }
}
