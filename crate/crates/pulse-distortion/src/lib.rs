//! Gravitationally induced deformation of photon wavepackets.
//!
//! A pulse sent from radius `r_a` and received at `r_b` in a Schwarzschild
//! spacetime arrives with its spectrum rescaled by the redshift factor χ.
//! Part of that change is a rigid shift of the spectrum (the classical
//! redshift); the rest is genuine distortion, measured here as the overlap
//! fidelity left over after the best rigid shift has been applied.
//!
//! All frequencies are expressed in the rescaled variable `z = (ω − ω₀)/σ`.

// Negated comparisons reject NaN together with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod coefficients;
pub mod multiphoton;
pub mod optimize;
pub mod overlap;
pub mod profiles;
pub mod quadrature;
pub mod spacetime;
pub mod states;
pub mod validation;

pub use coefficients::Coefficients;
pub use num_complex::Complex64;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("validity threshold exceeded: {0}")]
    Validity(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("support escape: {0}")]
    SupportEscape(String),
}

pub type Result<T> = std::result::Result<T, Error>;
