//! Pseudo-spectral laboratory for the Muskat equation with a two-dimensional
//! interface, posed on the periodic box `[0, l)^2`.
//!
//! The crate provides:
//!
//! * a spectral core (FFT-backed fields, Fourier multipliers, fractional
//!   Laplacians, Gagliardo seminorms),
//! * admissible weights `kappa` and the induced symbol `phi`,
//! * the Muskat nonlinearity `L(f)g` and its quasilinear decomposition into
//!   elliptic part, drift and remainder,
//! * weighted energy diagnostics (`A_phi`, `B_phi`, `Z_phi`, `mu_phi`,
//!   dissipation pairings, interpolation probes),
//! * a regularized Cauchy solver with diagnostics and checkpointing,
//! * verification suites that measure identities and bounds numerically.
//!
//! Start from the runnable examples (`cargo run --example ...`) or the thin
//! `muskatlab` binary, which exposes the same capabilities as subcommands.

pub mod bump;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod field;
pub mod grid;
pub mod muskat;
pub mod quadrature;
pub mod specfun;
pub mod verify;
pub mod weights;

pub use error::Error;
pub use field::{MultiplierTable, RealField, SpectralField};
pub use grid::Grid;
pub use quadrature::QuadratureSpec;
pub use weights::Weight;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
