//! Jacobi MIMO fading channel toolkit.
//!
//! The channel matrix is the `m_r x m_t` top-left block of an `m x m`
//! Haar-distributed unitary. Its squared singular values follow the Jacobi
//! (MANOVA) ensemble, and whenever `m_t + m_r > m` at least
//! `k = m_t + m_r - m` of them are exactly one.
//!
//! Modules:
//!
//! * [`ensembles`] samples Ginibre, Haar, truncated-Haar and Wishart-built
//!   Jacobi matrices and extracts their spectra.
//! * [`specfun`] provides Jacobi polynomials, Gauss-Jacobi rules and the
//!   regularized incomplete beta function with its inverse.
//! * [`analytic`] holds the closed forms: marginal eigenvalue density,
//!   ergodic capacity, single-input outage, `rho_norm` and the optimal DMT.
//! * [`simulate`] is the seeded Monte-Carlo engine.
//! * [`feedback`] runs the delayed-feedback zero-outage transmission scheme.
//!
//! All SNRs in the library are linear and all rates are in bits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod ensembles;
mod error;
pub mod feedback;
pub mod linalg;
pub mod simulate;
pub mod specfun;

pub use ensembles::ChannelDims;
pub use error::{Error, Result};
pub use simulate::{McConfig, McEstimate};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex<f64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
