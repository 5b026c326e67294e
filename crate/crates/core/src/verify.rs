//! Named verification suites: each bundles the identity and property checks
//! of one area into a deterministic pass/fail report.
//!
//! Thresholds live in one versioned table; a check never hardcodes its own
//! tolerance. Bounded-ratio checks calibrate their constant on one seeded
//! field family and assert on a disjoint one, so the bound is not fitted to
//! the data it is tested on.

use rand::SeedableRng;
use std::fmt::Write as _;

use crate::diagnostics::{
    difference_kernel_multiplier, dissipation_pairing_split, interpolation_probe,
    lipschitz_probe, DiffOrder, KernelSpec,
};
use crate::evolution::{run, InitialData, SimConfig};
use crate::field::{
    gradient, lip_norm, random_band_limited, rescale_critical, sobolev_norm, MultiplierTable,
    RealField,
};
use crate::grid::Grid;
use crate::muskat::{
    decompose, delta, drift, kernel_identity_check, muskat_rhs, weighted_fd_laplacian,
};
use crate::quadrature::QuadratureSpec;
use crate::weights::{
    build_weight_from_spectrum, default_radii, equivalence_constants, log_spaced,
    phi_from_kappa, phi_table_for_grid, validate_admissible, weight_growth_check, Weight,
};
use crate::{Error, Result};

pub const THRESHOLD_TABLE_VERSION: u32 = 1;

/// `(check name, threshold, value must be <= threshold)`; `false` in the last
/// slot means the value must be `>=` (convergence slopes).
pub const THRESHOLDS: &[(&str, f64, bool)] = &[
    ("identities.l_zero_relerr", 1e-3, true),
    ("identities.l_zero_slope", 1.0, false),
    ("identities.decomposition_residual", 1e-3, true),
    ("identities.decomposition_slope", 1.0, false),
    ("identities.kernel_identity_relerr", 1e-3, true),
    ("identities.weighted_laplacian_relerr", 2e-2, true),
    ("identities.slope_leibniz", 1e-12, true),
    ("identities.remainder_pointwise_violations", 0.0, true),
    ("kernels.first_order_constancy", 1e-3, true),
    ("kernels.taylor_exponent_relerr", 1e-2, true),
    ("kernels.second_order_bracket_excess", 5e-2, true),
    ("weights.admissible_failures", 0.0, true),
    ("weights.growth_constant", 1e6, true),
    ("weights.equivalence_drift", 5e-2, true),
    ("symmetry.translation_relerr", 1e-10, true),
    ("symmetry.drift_parity", 1e-10, true),
    ("symmetry.rescaling_drift", 1e-6, true),
    ("energy.dissipation_ratio_err", 1e-2, true),
    ("energy.self_adjoint_relerr", 1e-10, true),
    ("energy.interpolation_unit_excess", 1e-9, true),
    ("energy.interpolation_weighted_excess", 0.0, true),
    ("energy.lipschitz_excess", 0.0, true),
    ("decay.a_phi_growth", 1e-12, true),
];

fn threshold(name: &str) -> (f64, bool) {
    THRESHOLDS
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|&(_, t, up)| (t, up))
        .unwrap_or_else(|| panic!("check '{name}' missing from the threshold table"))
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    pub resolution: String,
    pub slope: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Human-readable fixed-width table.
    pub fn to_table(&self) -> String {
        let mut out = format!("suite {} (thresholds v{THRESHOLD_TABLE_VERSION})\n", self.suite);
        let w = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(8).max(8);
        for c in &self.checks {
            let verdict = if c.pass { "pass" } else { "FAIL" };
            let _ = write!(
                out,
                "  {verdict}  {: <w$}  value {: >12.5e}  threshold {: >9.1e}  [{}]",
                c.name, c.value, c.threshold, c.resolution
            );
            if let Some(s) = c.slope {
                let _ = write!(out, "  slope {s:.2}");
            }
            out.push('\n');
        }
        let _ = writeln!(out, "  overall: {}", if self.pass() { "pass" } else { "FAIL" });
        out
    }

    /// Structured text, one JSON object per line.
    pub fn to_json(&self) -> String {
        let mut out = format!(
            "{{\"suite\":\"{}\",\"threshold_version\":{THRESHOLD_TABLE_VERSION},\"pass\":{},\"checks\":[\n",
            self.suite,
            self.pass()
        );
        for (i, c) in self.checks.iter().enumerate() {
            let _ = write!(
                out,
                "{{\"name\":\"{}\",\"value\":{:e},\"threshold\":{:e},\"pass\":{},\"resolution\":\"{}\"",
                c.name, c.value, c.threshold, c.pass, c.resolution
            );
            if let Some(s) = c.slope {
                let _ = write!(out, ",\"slope\":{s:e}");
            }
            out.push('}');
            if i + 1 < self.checks.len() {
                out.push(',');
            }
            out.push('\n');
        }
        out.push_str("]}\n");
        out
    }
}

/// Resolution and seeding of a verification run.
#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub grid: Grid,
    pub quad: QuadratureSpec,
    pub seed: u64,
    /// Fields per random family.
    pub family: usize,
}

impl VerifyConfig {
    pub fn new(grid: Grid) -> Self {
        VerifyConfig { grid, quad: QuadratureSpec::reference(grid), seed: 1, family: 10 }
    }

    fn resolution(&self) -> String {
        format!(
            "n={} l={} quad {}x{}",
            self.grid.n, self.grid.l, self.quad.n_r, self.quad.n_theta
        )
    }

    /// Band-limited family with `||grad f||_inf = 0.3`; `part` selects
    /// disjoint calibration/validation streams.
    pub fn family(&self, part: u64) -> Vec<RealField> {
        let mut rng =
            rand::rngs::StdRng::seed_from_u64(self.seed ^ part.wrapping_mul(0x9e3779b97f4a7c15));
        (0..self.family)
            .map(|_| random_band_limited(self.grid, self.grid.n / 3, 0.3, &mut rng))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteId {
    Identities,
    Kernels,
    Weights,
    Symmetry,
    Energy,
    Decay,
}

impl std::str::FromStr for SuiteId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "identities" => SuiteId::Identities,
            "kernels" => SuiteId::Kernels,
            "weights" => SuiteId::Weights,
            "symmetry" => SuiteId::Symmetry,
            "energy" => SuiteId::Energy,
            "decay" => SuiteId::Decay,
            other => {
                return Err(Error::invalid(format!(
                    "unknown suite '{other}'; expected identities | kernels | weights | \
                     symmetry | energy | decay"
                )))
            }
        })
    }
}

pub const ALL_SUITES: [SuiteId; 6] = [
    SuiteId::Identities,
    SuiteId::Kernels,
    SuiteId::Weights,
    SuiteId::Symmetry,
    SuiteId::Energy,
    SuiteId::Decay,
];

impl SuiteId {
    pub fn name(self) -> &'static str {
        match self {
            SuiteId::Identities => "identities",
            SuiteId::Kernels => "kernels",
            SuiteId::Weights => "weights",
            SuiteId::Symmetry => "symmetry",
            SuiteId::Energy => "energy",
            SuiteId::Decay => "decay",
        }
    }
}

pub fn run_suite(id: SuiteId, cfg: &VerifyConfig) -> Result<SuiteReport> {
    let checks = match id {
        SuiteId::Identities => identities(cfg)?,
        SuiteId::Kernels => kernels(cfg)?,
        SuiteId::Weights => weights(cfg)?,
        SuiteId::Symmetry => symmetry(cfg)?,
        SuiteId::Energy => energy(cfg)?,
        SuiteId::Decay => decay(cfg)?,
    };
    Ok(SuiteReport { suite: id.name().to_string(), checks })
}

fn check(cfg: &VerifyConfig, name: &str, value: f64, slope: Option<f64>) -> CheckResult {
    let (t, upper) = threshold(name);
    let pass = value.is_finite() && if upper { value <= t } else { value >= t };
    CheckResult {
        name: name.to_string(),
        value,
        threshold: t,
        pass,
        resolution: cfg.resolution(),
        slope,
    }
}

fn rel_l2(a: &RealField, b: &RealField) -> f64 {
    let mut d = a.clone();
    d.add_scaled(-1.0, b);
    let bn = b.l2_norm();
    if bn == 0.0 { d.l2_norm() } else { d.l2_norm() / bn }
}

fn gaussian(grid: Grid, amp: f64, sigma: f64) -> RealField {
    RealField::from_fn(grid, |x, y| {
        let (u, v) = (x - grid.l / 2.0, y - grid.l / 2.0);
        amp * (-(u * u + v * v) / (2.0 * sigma * sigma)).exp()
    })
}

// --------------------------------------------------------------------------
// identities
// --------------------------------------------------------------------------

fn l_zero_relerr(f: &RealField, q: &QuadratureSpec) -> Result<f64> {
    let rhs = muskat_rhs(f, q)?;
    let d = MultiplierTable::fractional(f.grid, 1.0, |_| 1.0);
    let exact = f.transform().apply(&d)?.inverse().scaled(-1.0);
    Ok(rel_l2(&rhs, &exact))
}

/// Subsampled audit of the pointwise remainder-kernel bound
/// `|m_tilde| <= 6 |z - b| + 3 |grad delta f|`; returns the violation count.
pub fn remainder_pointwise_audit(f: &RealField, q: &QuadratureSpec) -> usize {
    let g = f.grid;
    let fh = f.transform();
    let (fx, fy) = gradient(&fh);
    let nodes = q.nodes();
    let mut violations = 0usize;
    for (it, &th) in nodes.pair_thetas.iter().enumerate() {
        if it % 4 != 0 {
            continue;
        }
        let (ct, st) = (th.cos(), th.sin());
        for (jr, &r) in nodes.radii.iter().enumerate() {
            if jr % 8 != 0 {
                continue;
            }
            let df = delta(f, (r * ct, r * st));
            let (dfx, dfy) = gradient(&df.transform());
            for idx in 0..g.len() {
                let z = df.data[idx] / r;
                let b = ct * fx.data[idx] + st * fy.data[idx];
                let w = (1.0 + z * z).powf(-1.5);
                let c0 = (1.0 + b * b).powf(-1.5);
                let w5 = (1.0 + z * z).powf(-2.5);
                let u = ct * dfx.data[idx] + st * dfy.data[idx];
                let mt = (w - c0) - 3.0 * z * w5 * ((z - b) + u);
                let gd = (dfx.data[idx].powi(2) + dfy.data[idx].powi(2)).sqrt();
                if mt.abs() > 6.0 * (z - b).abs() + 3.0 * gd + 1e-12 {
                    violations += 1;
                }
            }
        }
    }
    violations
}

fn identities(cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let q = &cfg.quad;
    let fine = q.refined();

    let tiny = gaussian(cfg.grid, 1e-6, cfg.grid.l / 14.0);
    let e0 = l_zero_relerr(&tiny, q)?;
    let e1 = l_zero_relerr(&tiny, &fine)?;
    let slope = (e0 / e1).log2();
    out.push(check(cfg, "identities.l_zero_relerr", e0, None));
    let mut sc = check(cfg, "identities.l_zero_slope", slope, Some(slope));
    if e0 < 1e-12 {
        // the coefficient-1 content is an exact multiplier, so the probe sits
        // at the roundoff floor at both resolutions and the halving clause is
        // vacuously met
        sc.pass = true;
        sc.resolution.push_str(" (roundoff floor)");
    }
    out.push(sc);

    let family = cfg.family(0);
    let mut worst = 0.0f64;
    for f in &family {
        worst = worst.max(decompose(f, f, q)?.residual);
    }
    let r_fine = decompose(&family[0], &family[0], &fine)?.residual;
    let r_coarse = decompose(&family[0], &family[0], q)?.residual;
    let dslope = (r_coarse / r_fine).log2();
    out.push(check(cfg, "identities.decomposition_residual", worst, None));
    out.push(check(cfg, "identities.decomposition_slope", dslope, Some(dslope)));

    let g0 = gaussian(cfg.grid, 1.0, cfg.grid.l / 14.0);
    let mut worst_ki = 0.0f64;
    for zeta in [(0.0, 0.0), (1.0, 0.0), (0.7, -0.7)] {
        worst_ki = worst_ki.max(kernel_identity_check(zeta, &g0, q)?.2);
    }
    out.push(check(cfg, "identities.kernel_identity_relerr", worst_ki, None));

    let mut worst_wl = 0.0f64;
    for w in [Weight::unit(), Weight::log_pow(0.375)?] {
        let fd = weighted_fd_laplacian(&g0, &w, q)?;
        let phi = phi_table_for_grid(&w, cfg.grid);
        let m = MultiplierTable::fractional(cfg.grid, 1.5, |r| phi.eval(r));
        let sp = g0.transform().apply(&m)?.inverse();
        worst_wl = worst_wl.max(rel_l2(&fd, &sp));
    }
    out.push(check(cfg, "identities.weighted_laplacian_relerr", worst_wl, None));

    // delta_a(fg) = f delta_a g + (delta_a f) (g shifted by a), on-lattice
    let h = cfg.grid.h();
    let alpha = (2.0 * h, 3.0 * h);
    let fa = &family[0];
    let ga = &family[1 % family.len()];
    let mut prod = fa.clone();
    for i in 0..prod.data.len() {
        prod.data[i] *= ga.data[i];
    }
    let lhs = delta(&prod, alpha);
    let df = delta(fa, alpha);
    let dg = delta(ga, alpha);
    let n = cfg.grid.n;
    let mut worst_lz = 0.0f64;
    let scale = fa.max_abs() * ga.max_abs() / h.max(1.0);
    for i in 0..n {
        for j in 0..n {
            let (is, js) = ((i + n - 2) % n, (j + n - 3) % n);
            let rhs = fa.data[i * n + j] * dg.data[i * n + j]
                + df.data[i * n + j] * ga.data[is * n + js];
            worst_lz = worst_lz.max((lhs.data[i * n + j] - rhs).abs());
        }
    }
    out.push(check(cfg, "identities.slope_leibniz", worst_lz / scale, None));

    let viol = remainder_pointwise_audit(&family[0], q);
    out.push(check(cfg, "identities.remainder_pointwise_violations", viol as f64, None));
    Ok(out)
}

// --------------------------------------------------------------------------
// kernels
// --------------------------------------------------------------------------

fn kernels(cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();

    let spec =
        KernelSpec { order: DiffOrder::First, b: 0.5, kappa_pow: 0, weight: Weight::unit() };
    let xi = [(0.5, 0.0), (0.0, 2.0), (1.3, -0.7), (4.0, 4.0), (0.2, 0.1)];
    let m = difference_kernel_multiplier(&spec, &xi)?;
    let consts: Vec<f64> = m
        .iter()
        .zip(xi.iter())
        .map(|(&v, &(x, y))| v / (x * x + y * y).sqrt())
        .collect();
    let mean = consts.iter().sum::<f64>() / consts.len() as f64;
    let dev = consts.iter().map(|c| (c / mean - 1.0).abs()).fold(0.0f64, f64::max);
    out.push(check(cfg, "kernels.first_order_constancy", dev, None));

    let spec = KernelSpec {
        order: DiffOrder::TaylorRemoved,
        b: 1.25,
        kappa_pow: 0,
        weight: Weight::unit(),
    };
    let m = difference_kernel_multiplier(&spec, &[(0.5, 0.0), (4.0, 0.0)])?;
    let measured = (m[1] / m[0]).ln() / 8.0f64.ln();
    out.push(check(
        cfg,
        "kernels.taylor_exponent_relerr",
        (measured - 2.5).abs() / 2.5,
        None,
    ));

    // second-order kappa^2 kernel against |xi|^3 phi^2: bracket from the
    // calibration frequencies, excess measured on disjoint validation ones
    let w = Weight::log_pow(0.375)?;
    let spec = KernelSpec { order: DiffOrder::Second, b: 1.5, kappa_pow: 2, weight: w.clone() };
    let phi = phi_table_for_grid(&w, cfg.grid);
    let ratio = |pts: &[(f64, f64)]| -> Result<Vec<f64>> {
        let m = difference_kernel_multiplier(&spec, pts)?;
        Ok(m.iter()
            .zip(pts.iter())
            .map(|(&v, &(x, y))| {
                let rho = (x * x + y * y).sqrt();
                let p = phi.eval(rho);
                v / (rho.powi(3) * p * p)
            })
            .collect())
    };
    let g = cfg.grid;
    let cal: Vec<(f64, f64)> =
        [(1, 0), (2, 1), (5, 3), (9, 0), (12, 12)].map(|(i, j)| g.xi_vec(i, j)).to_vec();
    let val: Vec<(f64, f64)> =
        [(1, 1), (3, 0), (4, 4), (7, 2), (10, 5)].map(|(i, j)| g.xi_vec(i, j)).to_vec();
    let rc = ratio(&cal)?;
    let (lo, hi) = rc
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
    let excess = ratio(&val)?
        .iter()
        .map(|&r| (lo / r - 1.0).max(r / hi - 1.0).max(0.0))
        .fold(0.0f64, f64::max);
    out.push(check(cfg, "kernels.second_order_bracket_excess", excess, None));
    Ok(out)
}

// --------------------------------------------------------------------------
// weights
// --------------------------------------------------------------------------

fn weights(cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let radii = log_spaced(1e-2, 40.0, 400);
    let spectrum: Vec<(f64, f64)> =
        radii.iter().map(|&r| (r, r.powi(4) * (-r * r).exp() * r)).collect();
    let suite = [
        Weight::unit(),
        Weight::log_pow(0.375)?,
        build_weight_from_spectrum(&spectrum)?,
    ];

    let failures = suite
        .iter()
        .filter(|w| !validate_admissible(w, &default_radii()).pass())
        .count();
    out.push(check(cfg, "weights.admissible_failures", failures as f64, None));

    let mut worst_c = 0.0f64;
    for w in &suite {
        for sigma in [0.25, 0.5, 1.0, 2.0] {
            let rep = weight_growth_check(w, sigma)?;
            worst_c = worst_c.max(rep.c_sigma).max(rep.c_sigma_sq);
        }
    }
    out.push(check(cfg, "weights.growth_constant", worst_c, None));

    let lambdas = log_spaced(1e-3, 1e6, 60);
    let dense = log_spaced(1e-3, 1e6, 120);
    let mut drift = 0.0f64;
    for w in &suite {
        let (c1, cc1) = equivalence_constants(&phi_from_kappa(w, &lambdas)?);
        let (c2, cc2) = equivalence_constants(&phi_from_kappa(w, &dense)?);
        drift = drift.max(((cc2 / c2) / (cc1 / c1) - 1.0).abs());
    }
    out.push(check(cfg, "weights.equivalence_drift", drift, None));
    Ok(out)
}

// --------------------------------------------------------------------------
// symmetry
// --------------------------------------------------------------------------

fn symmetry(cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let q = &cfg.quad;
    let f = &cfg.family(0)[0];
    let g = cfg.grid;
    let n = g.n;

    // shift by an even lattice multiple so the padded product grid translates
    let (si, sj) = (4usize, 6usize);
    let mut shifted = RealField::zeros(g);
    for i in 0..n {
        for j in 0..n {
            shifted.data[i * n + j] = f.data[((i + n - si) % n) * n + ((j + n - sj) % n)];
        }
    }
    let lf = muskat_rhs(f, q)?;
    let ls = muskat_rhs(&shifted, q)?;
    let mut lf_shifted = RealField::zeros(g);
    for i in 0..n {
        for j in 0..n {
            lf_shifted.data[i * n + j] = lf.data[((i + n - si) % n) * n + ((j + n - sj) % n)];
        }
    }
    out.push(check(cfg, "symmetry.translation_relerr", rel_l2(&ls, &lf_shifted), None));

    let (v1, v2) = drift(f, q)?;
    let (w1, w2) = drift(&f.scaled(-1.0), q)?;
    let parity = rel_l2(&w1, &v1).max(rel_l2(&w2, &v2));
    out.push(check(cfg, "symmetry.drift_parity", parity, None));

    let mut rd = 0.0f64;
    for lam in [2.0, 0.5] {
        let fr = rescale_critical(f, lam)?;
        let (h2_a, h2_b) = (
            sobolev_norm(&f.transform(), 2.0, |_| 1.0),
            sobolev_norm(&fr.transform(), 2.0, |_| 1.0),
        );
        let (lp_a, lp_b) = (lip_norm(&f.transform()), lip_norm(&fr.transform()));
        rd = rd.max((h2_b / h2_a - 1.0).abs()).max((lp_b / lp_a - 1.0).abs());
    }
    out.push(check(cfg, "symmetry.rescaling_drift", rd, None));
    Ok(out)
}

// --------------------------------------------------------------------------
// energy
// --------------------------------------------------------------------------

fn energy(cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let q = &cfg.quad;
    let w = Weight::unit();
    let phi = phi_table_for_grid(&w, cfg.grid);

    let mut last_err = f64::INFINITY;
    let mut sa = 0.0f64;
    for amp in [1e-3, 1e-4, 1e-5] {
        let f = gaussian(cfg.grid, amp, cfg.grid.l / 14.0);
        let (outer, inner) = dissipation_pairing_split(&f, &w, q)?;
        sa = sa.max((outer - inner).abs() / outer.abs());
        let b = sobolev_norm(&f.transform(), 2.5, |r| phi.eval(r)).powi(2);
        last_err = (outer / b - 1.0).abs();
    }
    out.push(check(cfg, "energy.dissipation_ratio_err", last_err, None));
    out.push(check(cfg, "energy.self_adjoint_relerr", sa, None));

    let cal = cfg.family(1);
    let val = cfg.family(2);
    let mut excess_unit = 0.0f64;
    for f in cal.iter().chain(val.iter()) {
        excess_unit = excess_unit.max(interpolation_probe(f, &w, 2.25)? - 1.0);
    }
    out.push(check(cfg, "energy.interpolation_unit_excess", excess_unit, None));

    let wl = Weight::log_pow(0.375)?;
    let calibrated = |probe: &dyn Fn(&RealField) -> Result<f64>| -> Result<f64> {
        let mut cmax = 0.0f64;
        for f in &cal {
            cmax = cmax.max(probe(f)?);
        }
        let cbound = cmax * 1.05;
        let mut excess = 0.0f64;
        for f in &val {
            excess = excess.max(probe(f)? - cbound);
        }
        Ok(excess)
    };
    let iw = calibrated(&|f| interpolation_probe(f, &wl, 2.25))?;
    out.push(check(cfg, "energy.interpolation_weighted_excess", iw, None));
    let lw = calibrated(&|f| Ok(lipschitz_probe(f, &wl).ratio))?;
    out.push(check(cfg, "energy.lipschitz_excess", lw, None));
    Ok(out)
}

// --------------------------------------------------------------------------
// decay
// --------------------------------------------------------------------------

fn decay(cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    let g = cfg.grid;
    let mut sim = SimConfig::new(
        g,
        0.1,
        InitialData::Gaussian { amplitude: 1e-4, width: g.l / 30.0, center: (g.l / 2.0, g.l / 2.0) },
    )?;
    sim.quad = cfg.quad;
    sim.dt_initial = 0.1;
    sim.t_end = 1.0;
    let (state, _) = run(&sim)?;
    let mut growth = 0.0f64;
    for w in state.history.windows(2) {
        if w[0].a_phi > 0.0 {
            growth = growth.max(w[1].a_phi / w[0].a_phi - 1.0);
        }
    }
    Ok(vec![check(cfg, "decay.a_phi_growth", growth, None)])
}

/// The datum scaled by the decay bisection: a smoothed square-wave front
/// (odd harmonics of a unit square wave). Slope concentrates at the two
/// transitions, which is where the transport part of the dynamics can
/// steepen the interface; radially symmetric bumps and single sine modes
/// relax monotonically at every amplitude and make useless probes.
pub fn decay_probe_data(amp: f64) -> InitialData {
    InitialData::ModeSum(
        [1i64, 3, 5, 7]
            .iter()
            .map(|&k| ((k, 0), 4.0 * amp / (std::f64::consts::PI * k as f64), 0.0))
            .collect(),
    )
}

/// Solver regularization used by the decay probes: small enough that the
/// added `|log eps|^-1` viscosity does not mask the transport transient.
pub const DECAY_PROBE_EPS: f64 = 1e-6;

/// Small-data threshold search at desk scale: bisect the largest initial
/// amplitude whose whole trajectory keeps `A_phi` nonincreasing. Reported,
/// not asserted: no closed-form value exists to compare against.
pub fn decay_threshold(
    cfg: &VerifyConfig,
    t_end: f64,
    dt: f64,
    lo0: f64,
    hi0: f64,
    iters: usize,
) -> Result<(f64, Vec<(f64, bool)>)> {
    let g = cfg.grid;
    let probe = |amp: f64| -> Result<bool> {
        let mut sim = SimConfig::new(g, DECAY_PROBE_EPS, decay_probe_data(amp))?;
        sim.quad = cfg.quad;
        sim.dt_initial = dt;
        sim.t_end = t_end;
        sim.record_every = 2;
        let (state, csv) = run(&sim)?;
        if csv.contains("# abort") {
            return Ok(false);
        }
        Ok(state
            .history
            .windows(2)
            .all(|w| w[1].a_phi <= w[0].a_phi * (1.0 + 1e-12)))
    };
    let mut trace = Vec::new();
    let (mut lo, mut hi) = (lo0, hi0);
    let ok_lo = probe(lo)?;
    trace.push((lo, ok_lo));
    if !ok_lo {
        return Err(Error::invalid(format!(
            "decay bisection: even amplitude {lo0} shows A_phi growth"
        )));
    }
    let ok_hi = probe(hi)?;
    trace.push((hi, ok_hi));
    if ok_hi {
        return Ok((hi, trace));
    }
    for _ in 0..iters {
        let mid = (lo * hi).sqrt();
        let ok = probe(mid)?;
        trace.push((mid, ok));
        if ok {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> VerifyConfig {
        let grid = Grid::new(32, 32.0).unwrap();
        VerifyConfig {
            grid,
            quad: QuadratureSpec::with_cells(grid, 32, 16, 0.01, 0.5).unwrap(),
            seed: 1,
            family: 3,
        }
    }

    #[test]
    fn threshold_table_is_complete_and_unique() {
        let mut names: Vec<&str> = THRESHOLDS.iter().map(|&(n, _, _)| n).collect();
        names.sort_unstable();
        let before = names.len();
        names.dedup();
        assert_eq!(before, names.len(), "duplicate threshold entries");
        for (_, t, _) in THRESHOLDS {
            assert!(t.is_finite());
        }
    }

    #[test]
    fn suite_ids_parse_and_report_shapes_hold() {
        for id in ALL_SUITES {
            assert_eq!(id.name().parse::<SuiteId>().unwrap(), id);
        }
        assert!("bogus".parse::<SuiteId>().is_err());
    }

    #[test]
    fn symmetry_suite_passes_at_quick_resolution() {
        let rep = run_suite(SuiteId::Symmetry, &quick()).unwrap();
        assert!(rep.pass(), "{}", rep.to_table());
        assert!(rep.to_json().contains("\"suite\":\"symmetry\""));
    }

    #[test]
    fn kernels_suite_passes() {
        let rep = run_suite(SuiteId::Kernels, &quick()).unwrap();
        assert!(rep.pass(), "{}", rep.to_table());
    }

    #[test]
    fn weights_suite_passes() {
        let rep = run_suite(SuiteId::Weights, &quick()).unwrap();
        assert!(rep.pass(), "{}", rep.to_table());
    }

    #[test]
    fn energy_suite_passes_at_quick_resolution() {
        let rep = run_suite(SuiteId::Energy, &quick()).unwrap();
        assert!(rep.pass(), "{}", rep.to_table());
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = quick();
        let a = run_suite(SuiteId::Kernels, &cfg).unwrap().to_json();
        let b = run_suite(SuiteId::Kernels, &cfg).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn identities_suite_passes_at_quick_resolution() {
        // the 1e-3 contract is stated at reference resolution; at the quick
        // one only the structure and slopes are meaningful, so run the two
        // cheap exact checks here and leave the full suite to the
        // acceptance tests
        let cfg = quick();
        let rep = run_suite(SuiteId::Identities, &cfg).unwrap();
        for c in &rep.checks {
            if c.name.ends_with("slope_leibniz")
                || c.name.ends_with("remainder_pointwise_violations")
                || c.name.ends_with("slope")
            {
                assert!(c.pass, "{}", rep.to_table());
            }
        }
    }
}
