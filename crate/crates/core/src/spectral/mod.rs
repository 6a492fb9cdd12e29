//! Quantum spectrum of the particle on the knot.
//!
//! The reduced equation `Σ'' + (h + E g) Σ = 0` has π-periodic coefficients in
//! `z = αφ/2`. Closure of the knot fixes the Floquet exponent, and the
//! spectrum follows from three routes:
//!
//! * [`hill`]: truncated Floquet–Fourier generalized eigenproblem, exact up to
//!   truncation;
//! * [`monodromy`]: shooting over one period, used as an independent check;
//! * [`mathieu`]: thin-torus and order-`1/γ²` closed forms kept as reference
//!   values.

pub mod fourier;
pub mod hill;
pub mod mathieu;
pub mod modes;
pub mod monodromy;
pub mod potential;

use thiserror::Error;

use crate::ode::OdeError;

pub use hill::{hill_energies, FloquetSolution, HillSolver, KnotSpectrum, Level, Method, SpectrumResult};
pub use mathieu::{thin_torus_energy, whittaker_energy, MathieuSeries, Parity};
pub use modes::{ModeFunction, ModeShape, WaveSample};
pub use monodromy::{monodromy_matrix, monodromy_residual};
pub use potential::{ParticleScales, ReducedPotential};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("potential truncated at {order} harmonics leaves relative tail {tail:e}")]
    TruncationTooShort { order: usize, tail: f64 },
    #[error("weight function is not positive (g({z}) = {value})")]
    NonPositiveWeight { z: f64, value: f64 },
    #[error("weight matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("truncation did not converge below {tolerance:e} by K = {cap}")]
    NoConvergence { cap: usize, tolerance: f64 },
    #[error("first-order Mathieu series is singular at |nu| = 1 (nu = {nu})")]
    Resonant { nu: f64 },
    #[error("root not bracketed near E = {energy}")]
    RootNotBracketed { energy: f64 },
    #[error("monodromy integration failed: {0}")]
    Ode(#[from] OdeError),
}
