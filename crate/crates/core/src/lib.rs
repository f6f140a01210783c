//! Numerical toolkit for the CR sphere `S^{2n+1}` and the Heisenberg group `H^n`.
//!
//! The crate covers the conformal geometry of the sphere (Cayley transform,
//! CR distances, conformal maps and their Jacobian densities), the spectra of
//! the intertwining operators on the bigraded harmonic spaces `H_{jk}`, the
//! theta-profile kernels and sharp exponential-integrability constants, and
//! the Beckner-Onofri / log-HLS functionals together with the weighted
//! eigenvalue problem behind the Hersch-type inequality.
//!
//! Most computations are done at "desk scale": dimensions `n = 1, 2` and
//! quadrature rules with a few hundred thousand nodes.

pub mod adams;
pub mod functionals;
pub mod geometry;
pub mod harmonics;
pub mod kernels;
pub mod quadrature;
pub mod sample;
pub mod special;
pub mod spectral;

pub use num_complex::Complex64 as C64;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("point lies on the Cayley pole (0,...,0,-1)")]
    Pole,
    #[error("non-finite value encountered in {0}")]
    NonFinite(String),
    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: String,
        iterations: usize,
        residual: f64,
    },
    #[error("Gram matrix is ill-conditioned (condition estimate {0:e})")]
    IllConditioned(f64),
    #[error("projection residual {0:e} exceeds tolerance")]
    ProjectionResidual(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

/// Homogeneous dimension `Q = 2n + 2`.
pub fn hom_dim(n: usize) -> f64 {
    (2 * n + 2) as f64
}

/// Volume of the unit sphere `S^{2n+1}`, `2 pi^{n+1} / n!`.
pub fn sphere_volume(n: usize) -> f64 {
    2.0 * std::f64::consts::PI.powi(n as i32 + 1) / special::factorial(n)
}
