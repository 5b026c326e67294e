use crate::error::Error;
use crate::Result;

/// Uniform periodic grid on `[0, l)^2` with `n x n` points.
///
/// Frequencies follow the usual FFT layout: index `i` maps to the integer
/// mode `k = i` for `i < n/2` and `k = i - n` otherwise, with physical
/// frequency `xi = 2*pi*k / l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub n: usize,
    pub l: f64,
}

impl Grid {
    pub fn new(n: usize, l: f64) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::invalid(format!("grid size n={n} must be even and >= 8")));
        }
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::invalid(format!("grid length l={l} must be positive")));
        }
        Ok(Grid { n, l })
    }

    /// Mesh width `h = l/n`.
    pub fn h(&self) -> f64 {
        self.l / self.n as f64
    }

    /// Physical coordinate of sample index `i` along one axis.
    pub fn x(&self, i: usize) -> f64 {
        self.h() * i as f64
    }

    /// Signed integer mode for FFT index `i`.
    pub fn mode(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Physical frequency `xi = 2*pi*k / l` for FFT index `i`.
    pub fn xi(&self, i: usize) -> f64 {
        2.0 * std::f64::consts::PI * self.mode(i) as f64 / self.l
    }

    /// Frequency vector `(xi_1, xi_2)` for the FFT index pair `(i, j)`
    /// (row `i` varies along the first axis).
    pub fn xi_vec(&self, i: usize, j: usize) -> (f64, f64) {
        (self.xi(i), self.xi(j))
    }

    /// Largest frequency magnitude on the lattice (Nyquist corner).
    pub fn xi_max(&self) -> f64 {
        let ny = std::f64::consts::PI * self.n as f64 / self.l;
        ny * std::f64::consts::SQRT_2
    }

    /// Smallest nonzero frequency magnitude, `2*pi/l`.
    pub fn xi_min(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.l
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}
