//! Real and spectral fields on a periodic grid, with Fourier multipliers.
//!
//! Conventions, fixed once for the whole crate:
//!
//! * the forward transform carries the `1/n^2` factor, so the coefficient at
//!   `xi = 0` is the mean of the field and a pure cosine mode has
//!   coefficients `1/2` at `+/-k`;
//! * `L^2` norms are physical: `||f||^2 = l^2 * sum_k |f_hat_k|^2`;
//! * homogeneous multipliers (`|xi|^s`, Riesz transforms) send the `xi = 0`
//!   mode to zero.

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::Error;
use crate::grid::Grid;
use crate::Result;

static FFT_CACHE: Lazy<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut cache = FFT_CACHE.lock().unwrap();
    cache
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

fn transpose(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// Unnormalized 2d FFT in place (rows along the second index).
fn fft2(data: &mut [Complex64], n: usize, inverse: bool) {
    let p = plan(n, inverse);
    for row in data.chunks_exact_mut(n) {
        p.process(row);
    }
    transpose(data, n);
    for row in data.chunks_exact_mut(n) {
        p.process(row);
    }
    transpose(data, n);
}

/// Compensated pairwise sum of a slice.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        let mut s = 0.0;
        for &x in v {
            s += x;
        }
        s
    } else {
        let mid = v.len() / 2;
        pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
    }
}

/// A sampled field on the grid (real values at grid points).
#[derive(Debug, Clone)]
pub struct RealField {
    pub grid: Grid,
    pub data: Vec<f64>,
}

/// Fourier coefficients of a field, FFT layout, mean-value normalization.
#[derive(Debug, Clone)]
pub struct SpectralField {
    pub grid: Grid,
    pub data: Vec<Complex64>,
}

/// A radial-or-general multiplier tabulated on the frequency lattice.
#[derive(Debug, Clone)]
pub struct MultiplierTable {
    pub grid: Grid,
    pub data: Vec<Complex64>,
}

impl RealField {
    pub fn zeros(grid: Grid) -> Self {
        RealField { grid, data: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for i in 0..grid.n {
            for j in 0..grid.n {
                data.push(f(grid.x(i), grid.x(j)));
            }
        }
        RealField { grid, data }
    }

    pub fn transform(&self) -> SpectralField {
        let n = self.grid.n;
        let mut buf: Vec<Complex64> = self.data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        fft2(&mut buf, n, false);
        let scale = 1.0 / (n * n) as f64;
        for c in buf.iter_mut() {
            *c *= scale;
        }
        SpectralField { grid: self.grid, data: buf }
    }

    /// Physical `L^2` norm, `(h^2 sum f^2)^(1/2)`.
    pub fn l2_norm(&self) -> f64 {
        let h2 = self.grid.h() * self.grid.h();
        let sq: Vec<f64> = self.data.iter().map(|&x| x * x).collect();
        (h2 * pairwise_sum(&sq)).sqrt()
    }

    /// Physical `L^2` pairing `integral f g dx`.
    pub fn l2_inner(&self, other: &RealField) -> Result<f64> {
        check_same_grid(self.grid, other.grid)?;
        let h2 = self.grid.h() * self.grid.h();
        let prod: Vec<f64> = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(&a, &b)| a * b)
            .collect();
        Ok(h2 * pairwise_sum(&prod))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
    }

    pub fn scaled(&self, c: f64) -> RealField {
        RealField { grid: self.grid, data: self.data.iter().map(|&x| c * x).collect() }
    }

    pub fn add_scaled(&mut self, c: f64, other: &RealField) {
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += c * b;
        }
    }

    /// Sup norm measured on a `2x` oversampled grid.
    pub fn sup_oversampled(&self) -> f64 {
        let fh = self.transform();
        let fine = fh.pad_to(2 * self.grid.n).inverse();
        fine.max_abs()
    }
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        SpectralField { grid, data: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn inverse(&self) -> RealField {
        let n = self.grid.n;
        let mut buf = self.data.clone();
        fft2(&mut buf, n, true);
        RealField { grid: self.grid, data: buf.iter().map(|c| c.re).collect() }
    }

    /// Inverse transform of `self + i * other`, recovering two real fields
    /// with a single complex FFT. Both inputs must be Hermitian-symmetric.
    pub fn inverse_pair(&self, other: &SpectralField) -> Result<(RealField, RealField)> {
        check_same_grid(self.grid, other.grid)?;
        let n = self.grid.n;
        let mut buf: Vec<Complex64> = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(&a, &b)| a + Complex64::new(0.0, 1.0) * b)
            .collect();
        fft2(&mut buf, n, true);
        let re = RealField { grid: self.grid, data: buf.iter().map(|c| c.re).collect() };
        let im = RealField { grid: self.grid, data: buf.iter().map(|c| c.im).collect() };
        Ok((re, im))
    }

    pub fn apply(&self, m: &MultiplierTable) -> Result<SpectralField> {
        check_same_grid(self.grid, m.grid)?;
        let data = self
            .data
            .iter()
            .zip(m.data.iter())
            .map(|(&a, &b)| a * b)
            .collect();
        Ok(SpectralField { grid: self.grid, data })
    }

    pub fn apply_in_place(&mut self, m: &MultiplierTable) -> Result<()> {
        check_same_grid(self.grid, m.grid)?;
        for (a, b) in self.data.iter_mut().zip(m.data.iter()) {
            *a *= b;
        }
        Ok(())
    }

    /// Enforce `f_hat(-xi) = conj(f_hat(xi))`; the Nyquist modes are forced
    /// real and the result inverts to a real field exactly.
    pub fn hermitian_symmetrize(&mut self) {
        let n = self.grid.n;
        for i in 0..n {
            let mi = (n - i) % n;
            for j in 0..n {
                let mj = (n - j) % n;
                if (i, j) < (mi, mj) {
                    let a = self.data[i * n + j];
                    let b = self.data[mi * n + mj];
                    let avg = 0.5 * (a + b.conj());
                    self.data[i * n + j] = avg;
                    self.data[mi * n + mj] = avg.conj();
                } else if (i, j) == (mi, mj) {
                    self.data[i * n + j] = Complex64::new(self.data[i * n + j].re, 0.0);
                }
            }
        }
    }

    /// Zero-pad the spectrum onto an `m x m` grid, `m >= n`. Coefficients are
    /// mode amplitudes, so no rescaling is needed.
    pub fn pad_to(&self, m: usize) -> SpectralField {
        let n = self.grid.n;
        assert!(m >= n && m % 2 == 0);
        let out_grid = Grid { n: m, l: self.grid.l };
        let mut out = SpectralField::zeros(out_grid);
        for i in 0..n {
            let oi = if i < n / 2 { i } else { i + m - n };
            for j in 0..n {
                let oj = if j < n / 2 { j } else { j + m - n };
                out.data[oi * m + oj] = self.data[i * n + j];
            }
        }
        out
    }

    /// Truncate the spectrum back to an `n x n` grid, discarding high modes.
    pub fn truncate_to(&self, n: usize) -> SpectralField {
        let m = self.grid.n;
        assert!(n <= m && n % 2 == 0);
        let out_grid = Grid { n, l: self.grid.l };
        let mut out = SpectralField::zeros(out_grid);
        for i in 0..n {
            let si = if i < n / 2 { i } else { i + m - n };
            for j in 0..n {
                let sj = if j < n / 2 { j } else { j + m - n };
                out.data[i * n + j] = self.data[si * m + sj];
            }
        }
        out
    }

    /// `l^2 sum |f_hat|^2`, equal to the physical `L^2` norm squared.
    pub fn l2_norm_sq(&self) -> f64 {
        let sq: Vec<f64> = self.data.iter().map(|c| c.norm_sqr()).collect();
        self.grid.l * self.grid.l * pairwise_sum(&sq)
    }

    /// Physical `L^2` pairing of the two underlying real fields.
    pub fn l2_inner(&self, other: &SpectralField) -> Result<f64> {
        check_same_grid(self.grid, other.grid)?;
        let prods: Vec<f64> = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a * b.conj()).re)
            .collect();
        Ok(self.grid.l * self.grid.l * pairwise_sum(&prods))
    }

    pub fn add_scaled(&mut self, c: f64, other: &SpectralField) {
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += c * b;
        }
    }

    pub fn scaled(&self, c: f64) -> SpectralField {
        SpectralField { grid: self.grid, data: self.data.iter().map(|&x| c * x).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, c| m.max(c.norm()))
    }
}

impl MultiplierTable {
    /// Tabulate a general symbol `m(xi_1, xi_2)` on the frequency lattice.
    pub fn from_symbol(grid: Grid, mut m: impl FnMut(f64, f64) -> Complex64) -> Self {
        let n = grid.n;
        let mut data = Vec::with_capacity(grid.len());
        for i in 0..n {
            for j in 0..n {
                let (x1, x2) = grid.xi_vec(i, j);
                data.push(m(x1, x2));
            }
        }
        MultiplierTable { grid, data }
    }

    /// Radial symbol `m(|xi|)`; the value at `xi = 0` is `m(0)`.
    pub fn radial(grid: Grid, mut m: impl FnMut(f64) -> f64) -> Self {
        Self::from_symbol(grid, |x1, x2| Complex64::new(m((x1 * x1 + x2 * x2).sqrt()), 0.0))
    }

    /// `|xi|^s * w(|xi|)`, zero at the origin (homogeneous convention).
    pub fn fractional(grid: Grid, s: f64, mut w: impl FnMut(f64) -> f64) -> Self {
        Self::from_symbol(grid, |x1, x2| {
            let r = (x1 * x1 + x2 * x2).sqrt();
            if r == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(r.powf(s) * w(r), 0.0)
            }
        })
    }

    /// Riesz transform component `R_j` with symbol `i xi_j / |xi|`, zero at
    /// the origin, so that `grad = R <D>` holds exactly on the lattice.
    pub fn riesz(grid: Grid, axis: usize) -> Self {
        Self::from_symbol(grid, |x1, x2| {
            let r = (x1 * x1 + x2 * x2).sqrt();
            if r == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                let comp = if axis == 0 { x1 } else { x2 };
                Complex64::new(0.0, comp / r)
            }
        })
    }

    /// Partial derivative symbol `i xi_j`.
    pub fn derivative(grid: Grid, axis: usize) -> Self {
        Self::from_symbol(grid, |x1, x2| {
            let comp = if axis == 0 { x1 } else { x2 };
            Complex64::new(0.0, comp)
        })
    }

    /// Translation by `alpha`: `(shift f)(x) = f(x - alpha)` via
    /// `exp(-i alpha . xi)`.
    pub fn shift(grid: Grid, alpha: (f64, f64)) -> Self {
        Self::from_symbol(grid, |x1, x2| {
            Complex64::from_polar(1.0, -(alpha.0 * x1 + alpha.1 * x2))
        })
    }
}

pub fn check_same_grid(a: Grid, b: Grid) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch(format!(
            "n={} l={} vs n={} l={}",
            a.n, a.l, b.n, b.l
        )));
    }
    Ok(())
}

/// Difference `f(x - alpha) - f(x)` computed spectrally (exact for
/// band-limited fields, any real `alpha`).
pub fn delta_alpha(f: &SpectralField, alpha: (f64, f64)) -> SpectralField {
    let mut out = f.clone();
    let n = f.grid.n;
    for i in 0..n {
        for j in 0..n {
            let (x1, x2) = f.grid.xi_vec(i, j);
            let phase = Complex64::from_polar(1.0, -(alpha.0 * x1 + alpha.1 * x2));
            out.data[i * n + j] *= phase - Complex64::new(1.0, 0.0);
        }
    }
    out
}

/// Weighted homogeneous Sobolev norm
/// `||f||_{H^s,w} = (l^2 sum |xi|^(2s) w(|xi|)^2 |f_hat|^2)^(1/2)`,
/// with the `xi = 0` mode excluded. `s = 0`, `w = 1` recovers the `L^2`
/// norm of the zero-mean part.
pub fn sobolev_norm(f: &SpectralField, s: f64, mut w: impl FnMut(f64) -> f64) -> f64 {
    let grid = f.grid;
    let n = grid.n;
    let mut terms = Vec::with_capacity(grid.len());
    for i in 0..n {
        for j in 0..n {
            let (x1, x2) = grid.xi_vec(i, j);
            let r = (x1 * x1 + x2 * x2).sqrt();
            if r == 0.0 {
                continue;
            }
            let wv = w(r);
            terms.push(r.powf(2.0 * s) * wv * wv * f.data[i * n + j].norm_sqr());
        }
    }
    (grid.l * grid.l * pairwise_sum(&terms)).sqrt()
}

/// Critical rescaling `f_lambda(x) = f(lambda x) / lambda`, realized exactly
/// in Fourier space: same coefficients scaled by `1/lambda` on the grid with
/// `l -> l / lambda`.
pub fn rescale_critical(f: &RealField, lambda: f64) -> Result<RealField> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::invalid(format!("rescale lambda={lambda} must be positive")));
    }
    let grid = Grid { n: f.grid.n, l: f.grid.l / lambda };
    Ok(RealField { grid, data: f.data.iter().map(|&x| x / lambda).collect() })
}

/// Band-limited random field: independent Gaussian coefficients on modes with
/// `max(|k1|,|k2|) <= kmax`, Hermitian-symmetrized, zero mean, then normalized
/// so that `||grad f||_(L^inf)` (oversampled) equals `lip`.
pub fn random_band_limited(
    grid: Grid,
    kmax: usize,
    lip: f64,
    rng: &mut impl rand::Rng,
) -> RealField {
    use rand::distributions::Distribution;
    let normal = rand_distr_standard_normal();
    let n = grid.n;
    let mut fh = SpectralField::zeros(grid);
    for i in 0..n {
        for j in 0..n {
            let k1 = grid.mode(i).unsigned_abs() as usize;
            let k2 = grid.mode(j).unsigned_abs() as usize;
            if k1.max(k2) > kmax || (k1 == 0 && k2 == 0) {
                continue;
            }
            // flat spectrum up to kmax, damped quadratically for smoothness
            let kk = (k1 * k1 + k2 * k2) as f64;
            let amp = 1.0 / (1.0 + kk);
            fh.data[i * n + j] =
                Complex64::new(normal.sample(rng), normal.sample(rng)) * amp;
        }
    }
    fh.hermitian_symmetrize();
    let f = fh.inverse();
    let cur = lip_norm(&f.transform());
    if cur == 0.0 {
        f
    } else {
        f.scaled(lip / cur)
    }
}

fn rand_distr_standard_normal() -> impl rand::distributions::Distribution<f64> {
    // Box-Muller via the uniform distribution, to avoid an extra dependency.
    struct BoxMuller;
    impl rand::distributions::Distribution<f64> for BoxMuller {
        fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        }
    }
    BoxMuller
}

/// `||grad f||_(L^inf)` measured on a `2x` oversampled grid.
pub fn lip_norm(f: &SpectralField) -> f64 {
    let gx = f.apply(&MultiplierTable::derivative(f.grid, 0)).unwrap();
    let gy = f.apply(&MultiplierTable::derivative(f.grid, 1)).unwrap();
    let m = 2 * f.grid.n;
    let (fx, fy) = gx.pad_to(m).inverse_pair(&gy.pad_to(m)).unwrap();
    fx.data
        .iter()
        .zip(fy.data.iter())
        .fold(0.0f64, |mx, (&a, &b)| mx.max((a * a + b * b).sqrt()))
}

/// Gradient of `f` sampled on its own grid.
pub fn gradient(f: &SpectralField) -> (RealField, RealField) {
    let gx = f.apply(&MultiplierTable::derivative(f.grid, 0)).unwrap();
    let gy = f.apply(&MultiplierTable::derivative(f.grid, 1)).unwrap();
    gx.inverse_pair(&gy).unwrap()
}
