//! Time integration of the regularized Cauchy problem
//! `d/dt f - |log eps|^-1 Laplace f = N_eps(f)` with mollified initial data.
//!
//! The scheme is first-order IMEX: the full linear symbol
//! `l(xi) = |log eps|^-1 |xi|^2 + |xi|` is diagonal in frequency and treated
//! by its exact exponential; the residual `N_eps(f) + <D> f`, which vanishes
//! at linearization, is explicit. One step is
//! `fhat <- e^{-l dt} (fhat + dt Rhat)`.

use num_complex::Complex64;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::bump::mollifier_multiplier;
use crate::diagnostics::{record, DiagnosticsRecord};
use crate::field::{sobolev_norm, MultiplierTable, RealField, SpectralField};
use crate::grid::Grid;
use crate::muskat::muskat_rhs_cutoff;
use crate::quadrature::QuadratureSpec;
use crate::weights::{phi_table_for_grid, Weight};
use crate::{Error, Result};

/// Initial profile of the interface.
#[derive(Debug, Clone)]
pub enum InitialData {
    Gaussian { amplitude: f64, width: f64, center: (f64, f64) },
    MultiBump(Vec<(f64, f64, (f64, f64))>),
    /// Entries `(k, amplitude, phase)`: `sum a cos(2 pi k.x / l + phase)`.
    ModeSum(Vec<((i64, i64), f64, f64)>),
    /// Field stored in a checkpoint; its grid must match the configured one.
    FromFile(PathBuf),
}

impl InitialData {
    /// Sample the profile. Localized kinds (Gaussian, bumps) must have
    /// decayed below `1e-10` of their amplitude before the band within
    /// `l/4` of the domain boundary, otherwise periodization would fold
    /// visible mass back in.
    pub fn build(&self, grid: Grid) -> Result<RealField> {
        match self {
            InitialData::Gaussian { amplitude, width, center } => {
                let f = Self::bumps(grid, &[(*amplitude, *width, *center)]);
                Self::check_boundary_decay(&f, amplitude.abs())?;
                Ok(f)
            }
            InitialData::MultiBump(list) => {
                let f = Self::bumps(grid, list);
                let amp = list.iter().map(|(a, _, _)| a.abs()).fold(0.0, f64::max);
                Self::check_boundary_decay(&f, amp)?;
                Ok(f)
            }
            InitialData::ModeSum(list) => {
                let k0 = 2.0 * std::f64::consts::PI / grid.l;
                Ok(RealField::from_fn(grid, |x, y| {
                    list.iter()
                        .map(|&((k1, k2), a, ph)| {
                            a * (k0 * (k1 as f64 * x + k2 as f64 * y) + ph).cos()
                        })
                        .sum()
                }))
            }
            InitialData::FromFile(path) => {
                let (state, _) = checkpoint_load(path)?;
                if state.fhat.grid != grid {
                    return Err(Error::Checkpoint(format!(
                        "initial data file has grid n={} l={}, config wants n={} l={}",
                        state.fhat.grid.n, state.fhat.grid.l, grid.n, grid.l
                    )));
                }
                Ok(state.fhat.inverse())
            }
        }
    }

    fn bumps(grid: Grid, list: &[(f64, f64, (f64, f64))]) -> RealField {
        RealField::from_fn(grid, |x, y| {
            list.iter()
                .map(|&(a, w, (cx, cy))| {
                    let (u, v) = (x - cx, y - cy);
                    a * (-(u * u + v * v) / (2.0 * w * w)).exp()
                })
                .sum()
        })
    }

    fn check_boundary_decay(f: &RealField, amp: f64) -> Result<()> {
        if amp == 0.0 {
            return Ok(());
        }
        let g = f.grid;
        let band = (g.l / 4.0 / g.h()).ceil() as usize;
        let mut worst = 0.0f64;
        for i in 0..g.n {
            for j in 0..g.n {
                if i >= band && i < g.n - band && j >= band && j < g.n - band {
                    continue;
                }
                worst = worst.max(f.data[i * g.n + j].abs());
            }
        }
        if worst > 1e-10 * amp {
            return Err(Error::invalid(format!(
                "initial data reaches {worst:.3e} within l/4 of the boundary \
                 (limit {:.3e}); narrow the profile or recenter it",
                1e-10 * amp
            )));
        }
        Ok(())
    }
}

/// Everything needed to run a simulation.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub grid: Grid,
    pub epsilon: f64,
    pub weight: Weight,
    pub quad: QuadratureSpec,
    pub dt_initial: f64,
    pub cfl: f64,
    pub t_end: f64,
    pub record_every: usize,
    /// 0 disables checkpointing.
    pub checkpoint_every: usize,
    pub checkpoint_path: Option<PathBuf>,
    pub initial: InitialData,
    /// Diagnostic mode: drop the explicit residual so the trajectory is the
    /// pure linear semigroup. Used by calibration checks, not physics.
    pub linear_only: bool,
}

impl SimConfig {
    pub fn new(grid: Grid, epsilon: f64, initial: InitialData) -> Result<Self> {
        let cfg = SimConfig {
            grid,
            epsilon,
            weight: Weight::unit(),
            quad: QuadratureSpec::reference(grid),
            dt_initial: 0.1,
            cfl: 0.4,
            t_end: 1.0,
            record_every: 1,
            checkpoint_every: 0,
            checkpoint_path: None,
            initial,
            linear_only: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        // strictly below 1: the viscosity coefficient 1/|log eps| blows up
        // as eps -> 1
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::invalid(format!("epsilon={} outside (0, 1)", self.epsilon)));
        }
        if !(self.dt_initial > 0.0 && self.dt_initial.is_finite()) {
            return Err(Error::invalid("dt_initial must be positive"));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::invalid("t_end must be positive"));
        }
        if !(self.cfl > 0.0) {
            return Err(Error::invalid("cfl must be positive"));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record_every must be at least 1"));
        }
        Ok(())
    }
}

/// Simulation state between steps.
#[derive(Debug, Clone)]
pub struct SimState {
    pub t: f64,
    pub fhat: SpectralField,
    pub step: u64,
    pub history: Vec<DiagnosticsRecord>,
    pub epsilon: f64,
}

/// Mollify with the unit-mass bump: spectral product with `chi_hat(eps |xi|)`.
pub fn mollify_initial(f0: &RealField, eps: f64) -> Result<RealField> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::invalid(format!("mollifier radius eps={eps} outside (0, 1]")));
    }
    Ok(f0.transform().apply(&mollifier_multiplier(f0.grid, eps))?.inverse())
}

/// Exact propagator of the linear symbol over one step.
pub fn linear_propagator(grid: Grid, epsilon: f64, dt: f64) -> MultiplierTable {
    let visc = 1.0 / epsilon.ln().abs();
    MultiplierTable::radial(grid, |rho| (-dt * (visc * rho * rho + rho)).exp())
}

fn enforce_hermitian(fh: &mut SpectralField) {
    let n = fh.grid.n;
    for i in 0..n {
        let im = (n - i) % n;
        for j in 0..n {
            let jm = (n - j) % n;
            if (i, j) > (im, jm) {
                continue;
            }
            let a = fh.data[i * n + j];
            let b = fh.data[im * n + jm].conj();
            let avg = 0.5 * (a + b);
            fh.data[i * n + j] = avg;
            fh.data[im * n + jm] = avg.conj();
        }
    }
}

fn check_finite(fh: &SpectralField) -> Result<()> {
    let worst = fh.data.iter().map(|c| c.norm_sqr()).fold(0.0f64, f64::max);
    if !worst.is_finite() || fh.l2_norm_sq() > 1e24 {
        return Err(Error::invalid("state blew up: norm exceeds 1e12 or is not finite"));
    }
    Ok(())
}

/// Explicit residual `N_eps(f) + <D> f`; zero at linearization.
fn explicit_residual(f: &RealField, cfg: &SimConfig) -> Result<RealField> {
    let mut out = muskat_rhs_cutoff(f, cfg.epsilon, &cfg.quad)?;
    let d1 = MultiplierTable::fractional(f.grid, 1.0, |_| 1.0);
    out.add_scaled(1.0, &f.transform().apply(&d1)?.inverse());
    Ok(out)
}

/// Advance by `dt` with the residual already evaluated at the current state.
fn step_with_residual(
    state: &SimState,
    cfg: &SimConfig,
    dt: f64,
    residual: Option<&RealField>,
) -> Result<SimState> {
    let mut fh = state.fhat.clone();
    if let Some(r) = residual {
        fh.add_scaled(dt, &r.transform());
    }
    fh.apply_in_place(&linear_propagator(cfg.grid, cfg.epsilon, dt))?;
    enforce_hermitian(&mut fh);
    check_finite(&fh)?;
    Ok(SimState {
        t: state.t + dt,
        fhat: fh,
        step: state.step + 1,
        history: state.history.clone(),
        epsilon: state.epsilon,
    })
}

/// Step size: `dt_initial` capped by `cfl` over the measured Lipschitz proxy
/// `||N_eps(f) + <D>f|| / ||f||` of the explicit part.
fn controlled_dt(cfg: &SimConfig, f_norm: f64, residual_norm: f64) -> f64 {
    let mut dt = cfg.dt_initial;
    if f_norm > 0.0 && residual_norm > 0.0 {
        dt = dt.min(cfg.cfl * f_norm / residual_norm);
    }
    dt
}

/// One IMEX step with the internal dt controller.
pub fn step(state: &SimState, cfg: &SimConfig) -> Result<SimState> {
    let f = state.fhat.inverse();
    let residual =
        if cfg.linear_only { None } else { Some(explicit_residual(&f, cfg)?) };
    let dt = controlled_dt(
        cfg,
        f.l2_norm(),
        residual.as_ref().map_or(0.0, |r| r.l2_norm()),
    );
    step_with_residual(state, cfg, dt, residual.as_ref())
}

/// Integrate to `t_end`, recording diagnostics and writing checkpoints.
/// Returns the final state and the CSV text; an abort is reported in a
/// `# abort:` trailer line rather than an error so partial data survives.
pub fn run(cfg: &SimConfig) -> Result<(SimState, String)> {
    cfg.validate()?;
    let f0 = cfg.initial.build(cfg.grid)?;
    let f = mollify_initial(&f0, cfg.epsilon)?;
    let mut state = SimState {
        t: 0.0,
        fhat: f.transform(),
        step: 0,
        history: Vec::new(),
        epsilon: cfg.epsilon,
    };
    let phi = phi_table_for_grid(&cfg.weight, cfg.grid);
    let a_of = |fh: &SpectralField| sobolev_norm(fh, 2.0, |r| phi.eval(r)).powi(2);
    let mut csv = vec![DiagnosticsRecord::csv_header()];
    let rec = record(&f, &cfg.weight, &cfg.quad, 0.0)?;
    csv.push(rec.csv_row());
    state.history.push(rec);
    let mut abort: Option<String> = None;

    while state.t < cfg.t_end - 1e-12 {
        let fr = state.fhat.inverse();
        let residual = if cfg.linear_only {
            None
        } else {
            match explicit_residual(&fr, cfg) {
                Ok(r) => Some(r),
                Err(e) => {
                    abort = Some(e.to_string());
                    break;
                }
            }
        };
        let mut dt = controlled_dt(
            cfg,
            fr.l2_norm(),
            residual.as_ref().map_or(0.0, |r| r.l2_norm()),
        );
        dt = dt.min(cfg.t_end - state.t);
        let a_prev = a_of(&state.fhat);
        let mut next = None;
        // reject-and-halve guard: in the small-data regime a step must not
        // inflate A_phi by more than 10%
        for _ in 0..16 {
            match step_with_residual(&state, cfg, dt, residual.as_ref()) {
                Ok(cand) => {
                    if a_prev > 0.0 && a_prev < 1.0 && a_of(&cand.fhat) > 1.1 * a_prev {
                        dt *= 0.5;
                        continue;
                    }
                    next = Some(cand);
                    break;
                }
                Err(e) => {
                    abort = Some(e.to_string());
                    break;
                }
            }
        }
        let Some(cand) = next else {
            if abort.is_none() {
                abort = Some("dt controller could not find a stable step".into());
            }
            break;
        };
        state = cand;
        if state.step % cfg.record_every as u64 == 0 {
            let rec = record(&state.fhat.inverse(), &cfg.weight, &cfg.quad, state.t)?;
            csv.push(rec.csv_row());
            state.history.push(rec);
        }
        if cfg.checkpoint_every > 0 && state.step % cfg.checkpoint_every as u64 == 0 {
            if let Some(path) = &cfg.checkpoint_path {
                checkpoint_save(&state, &cfg.weight, path)?;
            }
        }
    }
    if let Some(reason) = abort {
        csv.push(format!("# abort: {reason} at t={} step={}", state.t, state.step));
        if let Some(path) = &cfg.checkpoint_path {
            let dump = path.with_extension("abort");
            let _ = checkpoint_save(&state, &cfg.weight, &dump);
        }
    }
    csv.push(String::new());
    Ok((state, csv.join("\n")))
}

const CK_MAGIC: &[u8; 9] = b"MUSKATCK1";

/// Atomic binary checkpoint: magic, header, then the coefficients as
/// little-endian doubles (real part then imaginary, row-major).
pub fn checkpoint_save(state: &SimState, weight: &Weight, path: &Path) -> Result<()> {
    let g = state.fhat.grid;
    let wspec = weight.to_spec_text();
    let mut buf = Vec::with_capacity(64 + wspec.len() + 16 * g.len());
    buf.extend_from_slice(CK_MAGIC);
    buf.extend_from_slice(&(g.n as u64).to_le_bytes());
    buf.extend_from_slice(&g.l.to_le_bytes());
    buf.extend_from_slice(&state.t.to_le_bytes());
    buf.extend_from_slice(&state.step.to_le_bytes());
    buf.extend_from_slice(&state.epsilon.to_le_bytes());
    buf.extend_from_slice(&(wspec.len() as u64).to_le_bytes());
    buf.extend_from_slice(wspec.as_bytes());
    for c in &state.fhat.data {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    let tmp = path.with_extension("tmp");
    let mut file = std::fs::File::create(&tmp)?;
    file.write_all(&buf)?;
    file.sync_all()?;
    drop(file);
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Load a checkpoint; the history is not stored and comes back empty.
pub fn checkpoint_load(path: &Path) -> Result<(SimState, Weight)> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    let mut pos = 0usize;
    let take = |pos: &mut usize, k: usize| -> Result<&[u8]> {
        if *pos + k > buf.len() {
            return Err(Error::Checkpoint("file truncated".into()));
        }
        let s = &buf[*pos..*pos + k];
        *pos += k;
        Ok(s)
    };
    if take(&mut pos, 9)? != CK_MAGIC {
        return Err(Error::Checkpoint("bad magic: not a checkpoint file".into()));
    }
    let f64_at = |s: &[u8]| f64::from_le_bytes(s.try_into().unwrap());
    let u64_at = |s: &[u8]| u64::from_le_bytes(s.try_into().unwrap());
    let n = u64_at(take(&mut pos, 8)?) as usize;
    let l = f64_at(take(&mut pos, 8)?);
    let t = f64_at(take(&mut pos, 8)?);
    let step = u64_at(take(&mut pos, 8)?);
    let epsilon = f64_at(take(&mut pos, 8)?);
    let wlen = u64_at(take(&mut pos, 8)?) as usize;
    let wspec = std::str::from_utf8(take(&mut pos, wlen)?)
        .map_err(|_| Error::Checkpoint("weight spec is not utf-8".into()))?
        .to_string();
    let weight = Weight::from_spec_text(&wspec)?;
    let grid = Grid::new(n, l)?;
    let mut fhat = SpectralField::zeros(grid);
    for c in fhat.data.iter_mut() {
        let re = f64_at(take(&mut pos, 8)?);
        let im = f64_at(take(&mut pos, 8)?);
        *c = Complex64::new(re, im);
    }
    if pos != buf.len() {
        return Err(Error::Checkpoint("trailing bytes after coefficients".into()));
    }
    Ok((SimState { t, fhat, step, history: Vec::new(), epsilon }, weight))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bump::chi_hat;

    const PI: f64 = std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(32, 32.0).unwrap()
    }

    fn quick_quad(g: Grid) -> QuadratureSpec {
        QuadratureSpec::with_cells(g, 32, 16, 0.01, 0.5).unwrap()
    }

    fn base_cfg(initial: InitialData) -> SimConfig {
        let g = grid();
        let mut cfg = SimConfig::new(g, 0.1, initial).unwrap();
        cfg.quad = quick_quad(g);
        cfg
    }

    fn narrow_gaussian(amp: f64) -> InitialData {
        InitialData::Gaussian { amplitude: amp, width: 1.05, center: (16.0, 16.0) }
    }

    #[test]
    fn mollification_converges_and_preserves_mass() {
        let g = grid();
        let f = narrow_gaussian(1.0).build(g).unwrap();
        let mut prev = f64::INFINITY;
        for eps in [0.2, 0.1, 0.05] {
            let m = mollify_initial(&f, eps).unwrap();
            let mut d = m.clone();
            d.add_scaled(-1.0, &f);
            let err = d.l2_norm();
            assert!(err < prev, "eps={eps}: {err} !< {prev}");
            prev = err;
        }
        let c = RealField::from_fn(g, |_, _| 0.7);
        let mc = mollify_initial(&c, 0.3).unwrap();
        // unit mass holds to the accuracy of the tabulated bump transform
        let dev = mc.data.iter().map(|v| (v - 0.7).abs()).fold(0.0f64, f64::max);
        assert!(dev < 1e-7, "constant shifted by {dev}");
        let k = 3.0 * 2.0 * PI / g.l;
        let mode = RealField::from_fn(g, |x, _| (k * x).cos());
        let mm = mollify_initial(&mode, 0.25).unwrap();
        let factor = mm.data[1] / mode.data[1];
        let want = chi_hat(0.25 * k);
        assert!(want > 0.0 && want <= 1.0);
        assert!((factor - want).abs() < 1e-7, "{factor} vs {want}");
    }

    #[test]
    fn initial_data_must_vanish_near_the_boundary() {
        let g = grid();
        let wide = InitialData::Gaussian { amplitude: 1.0, width: 4.0, center: (16.0, 16.0) };
        assert!(wide.build(g).is_err());
        assert!(narrow_gaussian(1.0).build(g).is_ok());
        // periodic kinds are exempt
        let modes = InitialData::ModeSum(vec![((1, 2), 0.5, 0.0)]);
        assert!(modes.build(g).is_ok());
    }

    #[test]
    fn linear_mode_decays_by_the_exact_exponential() {
        let g = grid();
        let mut cfg = base_cfg(InitialData::ModeSum(vec![((2, 1), 0.3, 0.4)]));
        cfg.linear_only = true;
        cfg.dt_initial = 0.17;
        let f0 = cfg.initial.build(g).unwrap();
        let state = SimState {
            t: 0.0,
            fhat: f0.transform(),
            step: 0,
            history: Vec::new(),
            epsilon: cfg.epsilon,
        };
        let next = step(&state, &cfg).unwrap();
        let k0 = 2.0 * PI / g.l;
        let rho = k0 * (5.0f64).sqrt();
        let visc = 1.0 / 0.1f64.ln().abs();
        let want = (-(visc * rho * rho + rho) * 0.17).exp();
        let idx = 2 * g.n + 1;
        let got = next.fhat.data[idx].norm() / state.fhat.data[idx].norm();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn tiny_amplitude_follows_the_linear_semigroup() {
        // amplitude-Richardson: the nonlinear content of the trajectory is
        // quadratic in the data, so doubling the amplitude and rescaling
        // must reproduce the same trajectory to O(amplitude)
        let mut cfg = base_cfg(narrow_gaussian(1e-6));
        cfg.epsilon = 1e-3;
        cfg.dt_initial = 0.05;
        cfg.t_end = 0.5;
        cfg.record_every = 100;
        let (run_a, _) = run(&cfg).unwrap();
        cfg.initial = narrow_gaussian(2e-6);
        let (run_2a, _) = run(&cfg).unwrap();
        assert_eq!(run_a.step, run_2a.step);
        let mut d = run_2a.fhat.scaled(0.5);
        d.add_scaled(-1.0, &run_a.fhat);
        let rel = d.l2_norm_sq().sqrt() / run_a.fhat.l2_norm_sq().sqrt();
        assert!(rel < 1e-4, "nonlinear content at amplitude 1e-6: {rel}");
        // against the exact semigroup the residual also carries the
        // quadrature's linear symbol error, so only a loose bound holds
        cfg.initial = narrow_gaussian(1e-6);
        cfg.linear_only = true;
        let (lin, _) = run(&cfg).unwrap();
        let mut d = run_a.fhat.clone();
        d.add_scaled(-1.0, &lin.fhat);
        let rel = d.l2_norm_sq().sqrt() / lin.fhat.l2_norm_sq().sqrt();
        assert!(rel < 1e-2, "deviation from the exact semigroup {rel}");
    }

    #[test]
    fn time_step_halving_shows_first_order_convergence() {
        let mut cfg = base_cfg(narrow_gaussian(0.5));
        cfg.t_end = 0.3;
        cfg.record_every = 1000;
        cfg.cfl = 100.0; // measure pure dt refinement, not the safety cap
        let mut finals = Vec::new();
        for dt in [0.03, 0.015, 0.0075] {
            cfg.dt_initial = dt;
            finals.push(run(&cfg).unwrap().0.fhat);
        }
        let diff = |a: &SpectralField, b: &SpectralField| {
            let mut d = a.clone();
            d.add_scaled(-1.0, b);
            d.l2_norm_sq().sqrt()
        };
        let slope = (diff(&finals[0], &finals[1]) / diff(&finals[1], &finals[2])).log2();
        assert!((0.8..=1.2).contains(&slope), "dt convergence slope {slope}");
    }

    #[test]
    fn zero_data_stays_zero_and_means_are_frozen() {
        let mut cfg = base_cfg(InitialData::ModeSum(vec![]));
        cfg.t_end = 0.2;
        let (state, csv) = run(&cfg).unwrap();
        assert!(state.fhat.data.iter().all(|c| c.norm() == 0.0));
        assert!(!csv.contains("# abort"));

        let mut cfg = base_cfg(InitialData::ModeSum(vec![((1, 0), 0.1, 0.0), ((0, 0), 1.0, 0.3)]));
        cfg.t_end = 0.2;
        cfg.dt_initial = 0.05;
        // the mean to preserve is the one after mollification
        let f_moll =
            mollify_initial(&cfg.initial.build(cfg.grid).unwrap(), cfg.epsilon).unwrap();
        let mean0 = f_moll.transform().data[0];
        let (state, _) = run(&cfg).unwrap();
        assert!((state.fhat.data[0] - mean0).norm() < 1e-12);
        for w in state.history.windows(2) {
            assert!(w[1].t > w[0].t);
        }
    }

    #[test]
    fn small_data_dissipates_a_phi_monotonically() {
        let mut cfg = base_cfg(narrow_gaussian(1e-5));
        cfg.t_end = 0.4;
        cfg.dt_initial = 0.05;
        let (state, _) = run(&cfg).unwrap();
        for w in state.history.windows(2) {
            assert!(w[1].a_phi <= w[0].a_phi * (1.0 + 1e-12), "A_phi grew: {w:?}");
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let mut cfg = base_cfg(narrow_gaussian(0.3));
        cfg.t_end = 0.15;
        cfg.dt_initial = 0.05;
        let (_, csv1) = run(&cfg).unwrap();
        let (_, csv2) = run(&cfg).unwrap();
        assert_eq!(csv1, csv2);
    }

    #[test]
    fn checkpoints_round_trip_and_resume_bit_exactly() {
        let dir = std::env::temp_dir().join("muskat-ck-test");
        std::fs::create_dir_all(&dir).unwrap();
        let p1 = dir.join("a.ck");
        let p2 = dir.join("b.ck");

        let mut cfg = base_cfg(narrow_gaussian(0.3));
        cfg.t_end = 0.2;
        cfg.dt_initial = 0.05;
        cfg.record_every = 1000;
        let (full, _) = run(&cfg).unwrap();

        cfg.t_end = 0.1;
        let (half, _) = run(&cfg).unwrap();
        checkpoint_save(&half, &cfg.weight, &p1).unwrap();
        let (loaded, w) = checkpoint_load(&p1).unwrap();
        assert_eq!(w.to_spec_text(), cfg.weight.to_spec_text());
        assert_eq!(loaded.t, half.t);
        assert_eq!(loaded.step, half.step);
        assert_eq!(loaded.epsilon, half.epsilon);
        checkpoint_save(&loaded, &w, &p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());

        // continue the loaded half-run to t_end by hand
        cfg.t_end = 0.2;
        let mut state = loaded;
        while state.t < cfg.t_end - 1e-12 {
            let fr = state.fhat.inverse();
            let res = super::explicit_residual(&fr, &cfg).unwrap();
            let dt =
                controlled_dt(&cfg, fr.l2_norm(), res.l2_norm()).min(cfg.t_end - state.t);
            state = step_with_residual(&state, &cfg, dt, Some(&res)).unwrap();
        }
        for (a, b) in state.fhat.data.iter().zip(full.fhat.data.iter()) {
            assert_eq!(a, b, "resumed trajectory differs");
        }

        // corrupt header and wrong-size loads must fail loudly
        let mut bytes = std::fs::read(&p1).unwrap();
        bytes[0] = b'X';
        std::fs::write(&p2, &bytes).unwrap();
        assert!(checkpoint_load(&p2).is_err());
        let small = Grid::new(16, 32.0).unwrap();
        let from = InitialData::FromFile(p1.clone());
        assert!(from.build(small).is_err());
        assert!(from.build(grid()).is_ok());
    }

    #[test]
    fn config_validation_rejects_bad_parameters() {
        let g = grid();
        assert!(SimConfig::new(g, 0.0, InitialData::ModeSum(vec![])).is_err());
        assert!(SimConfig::new(g, 1.0, InitialData::ModeSum(vec![])).is_err());
        let mut cfg = SimConfig::new(g, 0.1, InitialData::ModeSum(vec![])).unwrap();
        cfg.dt_initial = -1.0;
        assert!(cfg.validate().is_err());
        cfg.dt_initial = 0.1;
        cfg.record_every = 0;
        assert!(cfg.validate().is_err());
        assert!(mollify_initial(&RealField::zeros(g), 0.0).is_err());
        assert!(mollify_initial(&RealField::zeros(g), 1.5).is_err());
    }
}
