//! Scalar energy functionals: the weighted norms `A_phi`, `B_phi`, `Z_phi`,
//! the dissipation pairing, difference-kernel multipliers, and the
//! interpolation/Lipschitz probes used by the verification suites.
//!
//! All pairings go through Parseval with the mean-value transform convention,
//! so `int u v dx = l^2 sum u_hat conj(v_hat)`.

use crate::field::{lip_norm, pairwise_sum, sobolev_norm, MultiplierTable, RealField};
use crate::muskat::muskat_l;
use crate::quadrature::QuadratureSpec;
use crate::specfun::{adaptive_simpson, j0, j1};
use crate::weights::{phi_table_for_grid, Weight, WeightKind};
use crate::{Error, Result};

const PI: f64 = std::f64::consts::PI;

/// Sobolev orders tracked by every diagnostics record, ascending.
pub const HS_ORDERS: [f64; 7] = [
    0.75,
    0.875,
    2.0,
    25.0 / 12.0,
    17.0 / 8.0,
    2.25,
    2.5,
];

/// CSV column labels matching [`HS_ORDERS`].
pub const HS_LABELS: [&str; 7] = ["3_4", "7_8", "2", "25_12", "17_8", "9_4", "5_2"];

/// One row of the time-series monitor.
#[derive(Debug, Clone)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// `||<D>^{2,phi} f||^2`.
    pub a_phi: f64,
    /// `||<D>^{5/2,phi} f||^2`.
    pub b_phi: f64,
    /// `||<D>^{3,phi} f||^2`.
    pub z_phi: f64,
    /// `1 / phi(B_phi / A_phi)`, defined as 1 at `f = 0`.
    pub mu_phi: f64,
    /// `||f||_{L^inf}` on a 2x oversampled grid.
    pub sup_f: f64,
    /// `||grad f||_{L^inf}` on a 2x oversampled grid.
    pub lip_f: f64,
    /// Unweighted `||f||_{H^s}` for each entry of [`HS_ORDERS`].
    pub hs_norms: [f64; 7],
    /// `int L(f)f <D>^{4,phi^2} f dx`.
    pub dissipation: f64,
    /// Empty when nothing is suspect; semicolon-joined notes otherwise.
    pub quadrature_flags: String,
}

impl DiagnosticsRecord {
    pub fn csv_header() -> String {
        let mut cols = vec![
            "t".to_string(),
            "a_phi".into(),
            "b_phi".into(),
            "z_phi".into(),
            "mu_phi".into(),
            "sup_f".into(),
            "lip_f".into(),
        ];
        for s in HS_LABELS {
            cols.push(format!("hs_{s}"));
        }
        cols.push("dissipation".into());
        cols.push("flags".into());
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut cols = vec![
            format!("{:.12e}", self.t),
            format!("{:.12e}", self.a_phi),
            format!("{:.12e}", self.b_phi),
            format!("{:.12e}", self.z_phi),
            format!("{:.12e}", self.mu_phi),
            format!("{:.12e}", self.sup_f),
            format!("{:.12e}", self.lip_f),
        ];
        for v in self.hs_norms {
            cols.push(format!("{v:.12e}"));
        }
        cols.push(format!("{:.12e}", self.dissipation));
        cols.push(self.quadrature_flags.clone());
        cols.join(",")
    }
}

/// `int u v dx` from real samples.
pub fn inner(u: &RealField, v: &RealField) -> f64 {
    let terms: Vec<f64> = u
        .data
        .iter()
        .zip(v.data.iter())
        .map(|(&a, &b)| a * b)
        .collect();
    let g = u.grid;
    g.l * g.l / (g.len() as f64) * pairwise_sum(&terms)
}

fn sup_norm_oversampled(f: &RealField) -> f64 {
    f.transform()
        .pad_to(2 * f.grid.n)
        .inverse()
        .max_abs()
}

/// Populate every monitored quantity for the state `f` at time `t`.
pub fn record(f: &RealField, w: &Weight, q: &QuadratureSpec, t: f64) -> Result<DiagnosticsRecord> {
    let phi = phi_table_for_grid(w, f.grid);
    let fh = f.transform();
    let a_phi = sobolev_norm(&fh, 2.0, |r| phi.eval(r)).powi(2);
    let b_phi = sobolev_norm(&fh, 2.5, |r| phi.eval(r)).powi(2);
    let z_phi = sobolev_norm(&fh, 3.0, |r| phi.eval(r)).powi(2);
    let mu_phi = if a_phi == 0.0 { 1.0 } else { 1.0 / phi.eval(b_phi / a_phi) };
    let mut hs_norms = [0.0; 7];
    for (k, s) in HS_ORDERS.iter().enumerate() {
        hs_norms[k] = sobolev_norm(&fh, *s, |_| 1.0);
    }
    let dissipation = dissipation_pairing(f, w, q)?;
    let mut flags = Vec::new();
    let tb = crate::muskat::tail_bound(f, q);
    if tb > 1e-3 * (1.0 + f.max_abs()) {
        flags.push(format!("tail_bound={tb:.3e}"));
    }
    Ok(DiagnosticsRecord {
        t,
        a_phi,
        b_phi,
        z_phi,
        mu_phi,
        sup_f: sup_norm_oversampled(f),
        lip_f: lip_norm(&fh),
        hs_norms,
        dissipation,
        quadrature_flags: flags.join(";"),
    })
}

/// Dissipation pairing `int L(f)f <D>^{4,phi^2} f dx`.
pub fn dissipation_pairing(f: &RealField, w: &Weight, q: &QuadratureSpec) -> Result<f64> {
    Ok(dissipation_pairing_split(f, w, q)?.0)
}

/// The pairing evaluated two ways: with the full `<D>^{4,phi^2}` on the right,
/// and with `<D>^{3/2,phi}` moved onto `L(f)f` by self-adjointness. The two
/// values agree to roundoff; the split is exposed so that the symmetry is a
/// measurable property rather than an assumption.
pub fn dissipation_pairing_split(
    f: &RealField,
    w: &Weight,
    q: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let grid = f.grid;
    let phi = phi_table_for_grid(w, grid);
    let lf = muskat_l(f, f, q)?;
    let m4 = MultiplierTable::fractional(grid, 4.0, |r| {
        let p = phi.eval(r);
        p * p
    });
    let outer = inner(&lf, &f.transform().apply(&m4)?.inverse());
    let m32 = MultiplierTable::fractional(grid, 1.5, |r| phi.eval(r));
    let m52 = MultiplierTable::fractional(grid, 2.5, |r| phi.eval(r));
    let lhs = lf.transform().apply(&m32)?.inverse();
    let rhs = f.transform().apply(&m52)?.inverse();
    Ok((outer, inner(&lhs, &rhs)))
}

/// Difference kernel flavor entering Lemma-style multiplier identities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffOrder {
    /// `|1 - e^{-i alpha.xi}|^2`.
    First,
    /// `|2 - 2 cos(alpha.xi)|^2`.
    Second,
    /// `|1 - e^{-i alpha.xi} - i alpha.xi|^2`.
    TaylorRemoved,
}

/// Kernel specification for [`difference_kernel_multiplier`]:
/// `m(xi) = int kernel(alpha, xi) kappa(1/|alpha|)^gamma dalpha / |alpha|^{2+2b}`.
#[derive(Debug, Clone)]
pub struct KernelSpec {
    pub order: DiffOrder,
    pub b: f64,
    /// Power on the radial weight; 0 disables it.
    pub kappa_pow: u32,
    pub weight: Weight,
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        let range = match self.order {
            DiffOrder::First => 0.0..1.0,
            DiffOrder::Second => 0.0..2.0,
            DiffOrder::TaylorRemoved => 1.0..2.0,
        };
        if !(self.b > range.start && self.b < range.end) {
            return Err(Error::invalid(format!(
                "exponent b={} outside ({}, {}) for {:?}",
                self.b, range.start, range.end, self.order
            )));
        }
        if self.kappa_pow > 4 {
            return Err(Error::invalid("kappa power must be at most 4"));
        }
        Ok(())
    }
}

// angular average of the kernel over the circle |alpha| = z/|xi|, divided by
// 2 pi; series branches avoid the cancellation of the Bessel forms
fn angular(order: DiffOrder, z: f64) -> f64 {
    let z2 = z * z;
    match order {
        DiffOrder::First => {
            if z < 0.3 {
                z2 * (0.5 - z2 / 32.0 + z2 * z2 / 1152.0)
            } else {
                2.0 - 2.0 * j0(z)
            }
        }
        DiffOrder::Second => {
            if z < 0.5 {
                z2 * z2 * (0.375 - 5.0 * z2 / 96.0 + 7.0 * z2 * z2 / 2048.0)
            } else {
                6.0 - 8.0 * j0(z) + 2.0 * j0(2.0 * z)
            }
        }
        DiffOrder::TaylorRemoved => {
            if z < 0.5 {
                z2 * z2 * (3.0 / 32.0 - 5.0 * z2 / 1152.0 + 7.0 * z2 * z2 / 73728.0)
            } else {
                2.0 - 2.0 * j0(z) - 2.0 * z * j1(z) + z2 / 2.0
            }
        }
    }
}

// leading series exponent of the angular average at z -> 0
fn small_z_power(order: DiffOrder) -> f64 {
    match order {
        DiffOrder::First => 2.0,
        _ => 4.0,
    }
}

/// Grid-independent multiplier `m(xi)` of the chosen difference kernel,
/// evaluated by radial quadrature of the closed-form angular average. The
/// radial variable is `z = |alpha| |xi|`; analytic endpoints cover `z -> 0`
/// (series) and the far field (power-law parts with the slowly varying
/// `kappa` frozen at the matching edge).
pub fn difference_kernel_multiplier(spec: &KernelSpec, xi: &[(f64, f64)]) -> Result<Vec<f64>> {
    spec.validate()?;
    let b = spec.b;
    let gam = spec.kappa_pow as i32;
    let kap = |lam: f64| {
        if gam == 0 {
            1.0
        } else {
            spec.weight.eval(lam).powi(gam)
        }
    };
    let order = spec.order;
    let mut out = Vec::with_capacity(xi.len());
    for &(x1, x2) in xi {
        let rho = (x1 * x1 + x2 * x2).sqrt();
        if rho == 0.0 {
            out.push(0.0);
            continue;
        }
        // head below z_s: kernel ~ c z^k0, kappa frozen at the edge
        let z_s = 0.25;
        let k0 = small_z_power(order);
        let head = {
            let kflat = kap(rho / z_s);
            let c = match order {
                DiffOrder::First => {
                    z_s.powf(2.0 - 2.0 * b) / (2.0 * (2.0 - 2.0 * b))
                        - z_s.powf(4.0 - 2.0 * b) / (32.0 * (4.0 - 2.0 * b))
                        + z_s.powf(6.0 - 2.0 * b) / (1152.0 * (6.0 - 2.0 * b))
                }
                DiffOrder::Second => {
                    0.375 * z_s.powf(4.0 - 2.0 * b) / (4.0 - 2.0 * b)
                        - 5.0 / 96.0 * z_s.powf(6.0 - 2.0 * b) / (6.0 - 2.0 * b)
                }
                DiffOrder::TaylorRemoved => {
                    3.0 / 32.0 * z_s.powf(4.0 - 2.0 * b) / (4.0 - 2.0 * b)
                        - 5.0 / 1152.0 * z_s.powf(6.0 - 2.0 * b) / (6.0 - 2.0 * b)
                }
            };
            let _ = k0;
            kflat * c
        };
        // smooth mid zone, then chunked Simpson across the oscillatory zone
        let mid = adaptive_simpson(
            &|z: f64| kap(rho / z) * angular(order, z) * z.powf(-1.0 - 2.0 * b),
            z_s,
            40.0,
            1e-10,
        );
        let mut osc = 0.0;
        let chunks = 256;
        let mut z_lo = 40.0;
        for _ in 0..chunks {
            let z_hi = z_lo + 2.0 * PI;
            let nn = 48;
            let h = (z_hi - z_lo) / nn as f64;
            let f = |z: f64| kap(rho / z) * angular(order, z) * z.powf(-1.0 - 2.0 * b);
            let mut ssum = f(z_lo) + f(z_hi);
            for k in 1..nn {
                ssum += f(z_lo + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            osc += ssum * h / 3.0;
            z_lo = z_hi;
        }
        // far field: non-oscillatory parts of the kernel, kappa frozen
        let z1 = z_lo;
        let kfar = kap(rho / z1);
        let far = kfar
            * match order {
                DiffOrder::First => 2.0 * z1.powf(-2.0 * b) / (2.0 * b),
                DiffOrder::Second => 6.0 * z1.powf(-2.0 * b) / (2.0 * b),
                DiffOrder::TaylorRemoved => {
                    2.0 * z1.powf(-2.0 * b) / (2.0 * b)
                        + 0.5 * z1.powf(2.0 - 2.0 * b) / (2.0 * b - 2.0)
                }
            };
        out.push(2.0 * PI * rho.powf(2.0 * b) * (head + mid + osc + far));
    }
    Ok(out)
}

/// Interpolation ratio `||f||_{H^s} / (mu_phi A_phi^{5/2-s} B_phi^{s-2})`
/// for `s` strictly between 2 and 5/2, with `A_phi`, `B_phi` the squared
/// weighted norms. For the unit weight this collapses to the classical
/// frequency-space Hoelder ratio and cannot exceed 1.
pub fn interpolation_probe(f: &RealField, w: &Weight, s: f64) -> Result<f64> {
    if !(s > 2.0 && s < 2.5) {
        return Err(Error::invalid(format!("interpolation order s={s} outside (2, 5/2)")));
    }
    let phi = phi_table_for_grid(w, f.grid);
    let fh = f.transform();
    let a_phi = sobolev_norm(&fh, 2.0, |r| phi.eval(r)).powi(2);
    let b_phi = sobolev_norm(&fh, 2.5, |r| phi.eval(r)).powi(2);
    if a_phi == 0.0 || b_phi == 0.0 {
        return Err(Error::invalid("interpolation probe needs a nonzero field"));
    }
    let mu = 1.0 / phi.eval(b_phi / a_phi);
    let hs = sobolev_norm(&fh, s, |_| 1.0);
    Ok(hs / (mu * a_phi.powf(2.5 - s) * b_phi.powf(s - 2.0)))
}

/// Outcome of [`lipschitz_probe`].
#[derive(Debug, Clone, Copy)]
pub struct LipschitzReport {
    pub lip: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Measures `||grad f||_{L^inf}` against
/// `1 + ||f||_{L^inf} + A_phi log(2 + B_phi)^{(1-2a)/2}`, where `a` is the
/// logarithmic growth exponent encoded in the weight (0 for the unit weight).
pub fn lipschitz_probe(f: &RealField, w: &Weight) -> LipschitzReport {
    let a = match w.kind() {
        WeightKind::LogPow { a } => *a,
        _ => 0.0,
    };
    let phi = phi_table_for_grid(w, f.grid);
    let fh = f.transform();
    let a_phi = sobolev_norm(&fh, 2.0, |r| phi.eval(r)).powi(2);
    let b_phi = sobolev_norm(&fh, 2.5, |r| phi.eval(r)).powi(2);
    let lip = lip_norm(&fh);
    if a_phi == 0.0 {
        return LipschitzReport { lip, bound: 1.0, ratio: lip };
    }
    let bound = 1.0
        + sup_norm_oversampled(f)
        + a_phi * (2.0 + b_phi).ln().powf((1.0 - 2.0 * a) / 2.0);
    LipschitzReport { lip, bound, ratio: lip / bound }
}

/// Atomic text write: temp file in the same directory, then rename.
pub fn write_atomic(path: &std::path::Path, text: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Gnuplot-friendly per-quantity `(t, value)` files for the monitored
/// scalars. Returns the written paths.
pub fn export_plot_data(
    history: &[DiagnosticsRecord],
    dir: &std::path::Path,
) -> Result<Vec<std::path::PathBuf>> {
    if history.is_empty() {
        return Err(Error::invalid("export_plot_data: empty diagnostics history"));
    }
    std::fs::create_dir_all(dir)?;
    let series: [(&str, fn(&DiagnosticsRecord) -> f64); 5] = [
        ("a_phi", |r| r.a_phi),
        ("b_phi", |r| r.b_phi),
        ("lip_f", |r| r.lip_f),
        ("sup_f", |r| r.sup_f),
        ("dissipation", |r| r.dissipation),
    ];
    let mut written = Vec::new();
    for (name, get) in series {
        let mut text = String::new();
        for r in history {
            text.push_str(&format!("{:.12e} {:.12e}\n", r.t, get(r)));
        }
        let path = dir.join(format!("{name}.dat"));
        write_atomic(&path, &text)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::random_band_limited;
    use crate::grid::Grid;
    use crate::weights::PHI_UNIT;
    use rand::SeedableRng;

    fn grid() -> Grid {
        Grid::new(32, 32.0).unwrap()
    }

    fn qref() -> QuadratureSpec {
        QuadratureSpec::reference(grid())
    }

    fn gaussian(g: Grid, amp: f64, sigma: f64) -> RealField {
        RealField::from_fn(g, |x, y| {
            let (u, v) = (x - g.l / 2.0, y - g.l / 2.0);
            amp * (-(u * u + v * v) / (2.0 * sigma * sigma)).exp()
        })
    }

    #[test]
    fn record_of_zero_is_all_zero_with_unit_mu() {
        let f = RealField::zeros(grid());
        let r = record(&f, &Weight::unit(), &qref(), 0.0).unwrap();
        assert_eq!(r.a_phi, 0.0);
        assert_eq!(r.b_phi, 0.0);
        assert_eq!(r.z_phi, 0.0);
        assert_eq!(r.mu_phi, 1.0);
        assert_eq!(r.sup_f, 0.0);
        assert_eq!(r.lip_f, 0.0);
        assert_eq!(r.dissipation, 0.0);
        assert!(r.hs_norms.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_mode_energies_are_one_term_parseval_sums() {
        let g = grid();
        let a = 0.37;
        let k = 2.0 * 2.0 * PI / g.l; // mode (2, 0)
        let f = RealField::from_fn(g, |x, _| a * (k * x).cos());
        let r = record(&f, &Weight::unit(), &qref(), 0.0).unwrap();
        // phi for the unit weight is the constant PHI_UNIT up to the 1e-8
        // accuracy of the tabulated quadrature
        let base = g.l * g.l * a * a / 2.0 * PHI_UNIT * PHI_UNIT;
        assert!((r.a_phi - base * k.powi(4)).abs() / r.a_phi < 1e-7);
        assert!((r.b_phi - base * k.powi(5)).abs() / r.b_phi < 1e-7);
        assert!((r.z_phi - base * k.powi(6)).abs() / r.z_phi < 1e-7);
        assert!((r.mu_phi * PHI_UNIT - 1.0).abs() < 1e-7);
        assert!((r.sup_f - a).abs() < 1e-9);
        assert!((r.lip_f - a * k).abs() < 1e-9);
    }

    #[test]
    fn record_matches_direct_frequency_sums() {
        let g = grid();
        let w = Weight::log_pow(0.375).unwrap();
        let f = gaussian(g, 1.0, 2.3);
        let r = record(&f, &w, &qref(), 1.5).unwrap();
        let phi = phi_table_for_grid(&w, g);
        let fh = f.transform();
        let mut direct = [0.0f64; 3];
        for i in 0..g.n {
            for j in 0..g.n {
                let (x1, x2) = g.xi_vec(i, j);
                let rho = (x1 * x1 + x2 * x2).sqrt();
                if rho == 0.0 {
                    continue;
                }
                let p = phi.eval(rho);
                let e = fh.data[i * g.n + j].norm_sqr() * p * p;
                direct[0] += rho.powi(4) * e;
                direct[1] += rho.powi(5) * e;
                direct[2] += rho.powi(6) * e;
            }
        }
        let l2 = g.l * g.l;
        assert!((r.a_phi - l2 * direct[0]).abs() / r.a_phi < 1e-10);
        assert!((r.b_phi - l2 * direct[1]).abs() / r.b_phi < 1e-10);
        assert!((r.z_phi - l2 * direct[2]).abs() / r.z_phi < 1e-10);
        assert!(r.mu_phi > 0.0 && r.mu_phi <= 1.0);
        assert_eq!(
            r.csv_row().split(',').count(),
            DiagnosticsRecord::csv_header().split(',').count()
        );
    }

    #[test]
    fn dissipation_split_agrees_to_roundoff() {
        let g = grid();
        let f = gaussian(g, 0.8, 2.0);
        let (outer, inner_v) =
            dissipation_pairing_split(&f, &Weight::log_pow(0.375).unwrap(), &qref()).unwrap();
        assert!((outer - inner_v).abs() / outer.abs() < 1e-10, "{outer} vs {inner_v}");
    }

    #[test]
    fn dissipation_linearizes_to_the_weighted_b_norm() {
        let g = grid();
        let w = Weight::unit();
        let q = qref();
        let f = gaussian(g, 1e-4, 2.3);
        let d = dissipation_pairing(&f, &w, &q).unwrap();
        let phi = phi_table_for_grid(&w, g);
        let b = sobolev_norm(&f.transform(), 2.5, |r| phi.eval(r)).powi(2);
        assert!((d / b - 1.0).abs() < 1e-2, "ratio {}", d / b);
    }

    #[test]
    fn first_order_kernel_has_a_direction_free_linear_symbol() {
        let spec = KernelSpec {
            order: DiffOrder::First,
            b: 0.5,
            kappa_pow: 0,
            weight: Weight::unit(),
        };
        let xi = [(0.5, 0.0), (0.0, 2.0), (1.3, -0.7), (4.0, 4.0), (0.2, 0.1)];
        let m = difference_kernel_multiplier(&spec, &xi).unwrap();
        let cs: Vec<f64> = m
            .iter()
            .zip(xi.iter())
            .map(|(&v, &(x, y))| v / (x * x + y * y).sqrt())
            .collect();
        // closed form for b = 1/2: 2 pi |xi| int_0^inf (2 - 2 J0(u)) u^-2 du = 4 pi |xi|
        for &c in &cs {
            assert!((c - 4.0 * PI).abs() / (4.0 * PI) < 1e-3, "constant {c}");
        }
    }

    #[test]
    fn taylor_removed_kernel_scales_like_the_prescribed_power() {
        let spec = KernelSpec {
            order: DiffOrder::TaylorRemoved,
            b: 1.25,
            kappa_pow: 1,
            weight: Weight::unit(),
        };
        let m = difference_kernel_multiplier(&spec, &[(0.5, 0.0), (4.0, 0.0)]).unwrap();
        let measured = (m[1] / m[0]).ln() / 8.0f64.ln();
        assert!((measured - 2.0 * spec.b).abs() / (2.0 * spec.b) < 1e-2, "exponent {measured}");
    }

    #[test]
    fn second_order_kernel_with_kappa_squared_brackets_the_weighted_symbol() {
        let w = Weight::log_pow(0.375).unwrap();
        let spec = KernelSpec { order: DiffOrder::Second, b: 1.5, kappa_pow: 2, weight: w.clone() };
        let g = grid();
        let phi = phi_table_for_grid(&w, g);
        let xi: Vec<(f64, f64)> = [(1usize, 0usize), (2, 1), (5, 3), (9, 0), (12, 12)]
            .iter()
            .map(|&(i, j)| g.xi_vec(i, j))
            .collect();
        let m = difference_kernel_multiplier(&spec, &xi).unwrap();
        let ratios: Vec<f64> = m
            .iter()
            .zip(xi.iter())
            .map(|(&v, &(x, y))| {
                let rho = (x * x + y * y).sqrt();
                let p = phi.eval(rho);
                v / (rho.powi(3) * p * p)
            })
            .collect();
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0f64, f64::max);
        assert!(lo > 0.0 && hi / lo < 10.0, "bracket [{lo}, {hi}]");
    }

    #[test]
    fn first_order_kernel_closes_the_gagliardo_loop() {
        let g = grid();
        let s = 0.5;
        let mut rng = rand::rngs::StdRng::seed_from_u64(77);
        let f = random_band_limited(g, 8, 0.3, &mut rng);
        let (gag, low) = crate::quadrature::gagliardo_seminorm(&f, s, &qref()).unwrap();
        assert!(!low);
        let spec =
            KernelSpec { order: DiffOrder::First, b: s, kappa_pow: 0, weight: Weight::unit() };
        let fh = f.transform();
        let mut total = 0.0;
        for i in 0..g.n {
            for j in 0..g.n {
                if i == 0 && j == 0 {
                    continue;
                }
                let e = fh.data[i * g.n + j].norm_sqr();
                if e < 1e-30 {
                    continue;
                }
                let m = difference_kernel_multiplier(&spec, &[g.xi_vec(i, j)]).unwrap()[0];
                total += m * e;
            }
        }
        let want = (g.l * g.l * total).sqrt();
        assert!((gag / want - 1.0).abs() < 1e-2, "{gag} vs {want}");
    }

    #[test]
    fn kernel_spec_validation_rejects_divergent_exponents() {
        let w = Weight::unit();
        for (order, b) in [
            (DiffOrder::First, 1.0),
            (DiffOrder::First, 0.0),
            (DiffOrder::Second, 2.0),
            (DiffOrder::TaylorRemoved, 0.9),
            (DiffOrder::TaylorRemoved, 2.0),
        ] {
            let spec = KernelSpec { order, b, kappa_pow: 0, weight: w.clone() };
            assert!(difference_kernel_multiplier(&spec, &[(1.0, 0.0)]).is_err(), "{order:?} {b}");
        }
    }

    #[test]
    fn interpolation_ratio_for_the_unit_weight_never_exceeds_one() {
        let g = grid();
        let w = Weight::unit();
        let mut rng = rand::rngs::StdRng::seed_from_u64(5150);
        for _ in 0..5 {
            let f = random_band_limited(g, 10, 0.3, &mut rng);
            let r = interpolation_probe(&f, &w, 2.25).unwrap();
            assert!(r <= 1.0 + 1e-9, "ratio {r}");
        }
        let single = RealField::from_fn(g, |x, _| (2.0 * 2.0 * PI * x / g.l).cos());
        let r = interpolation_probe(&single, &w, 2.25).unwrap();
        assert!((r - 1.0).abs() < 1e-9, "single mode saturates: {r}");
        assert!(interpolation_probe(&single, &w, 2.0).is_err());
        assert!(interpolation_probe(&single, &w, 2.5).is_err());
        assert!(interpolation_probe(&RealField::zeros(g), &w, 2.25).is_err());
    }

    #[test]
    fn lipschitz_probe_behaves_across_amplitudes() {
        let g = grid();
        let w = Weight::log_pow(0.375).unwrap();
        let z = lipschitz_probe(&RealField::zeros(g), &w);
        assert_eq!(z.ratio, 0.0);
        let mut worst = 0.0f64;
        for amp in [1e-3, 1e-2, 1e-1, 1.0] {
            let r = lipschitz_probe(&gaussian(g, amp, 2.3), &w);
            assert!(r.ratio.is_finite() && r.ratio > 0.0);
            worst = worst.max(r.ratio);
        }
        assert!(worst < 1.0, "family ratio stays bounded: {worst}");
    }
}
