//! Pseudo-spectral solver and explicit estimate toolkit for fractional
//! nonlinear Schrödinger equations on the torus,
//! `i u_t - (-Δ)^{s/2} u + 𝒩(|u|) u = 0`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod estimates;
pub mod initial;
mod jet;
pub mod nonlinearity;
pub mod norms;
pub mod quadrature;
pub mod snapshot;
pub mod solver;
pub mod spectral;
pub mod verification;

pub use error::{FnlsError, MembershipFailure, Result};
pub use nonlinearity::{Builtin, NonlinearitySpec};
pub use num_complex::Complex64;
pub use spectral::{PhysicalField, SpectralField, TorusGrid};
