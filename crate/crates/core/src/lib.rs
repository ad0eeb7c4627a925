//! Pathwise simulation of nonlocal reaction-diffusion equations on (0, 1)
//! driven by stationary approximations of white noise.
//!
//! The crate is organised bottom-up:
//!
//! * [`wiener`]: seeded two-sided Brownian paths and the Wiener shift.
//! * [`noise`]: the stationary noises (Ornstein-Uhlenbeck, mollified
//!   derivative, difference quotient), their integrals and the auxiliary
//!   stationary variables, plus empirical hypothesis certificates.
//! * [`galerkin`]: sine-spectral fields, norms and transforms.
//! * [`model`]: problem data and assumption checks.
//! * [`solver`]: IMEX time stepping of the deterministic, stationary-noise
//!   and (through conjugation) white-noise equations.
//! * [`conjugate`]: auxiliary processes and the state transforms.
//! * [`attractor`]: absorbing radii, pullback sampling and Hausdorff
//!   semidistances.
//! * [`io`], [`manifest`], [`ensemble`]: output formats, provenance and the
//!   deterministic worker pool shared by the CLI.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attractor;
pub mod conjugate;
pub mod ensemble;
pub mod error;
pub mod galerkin;
pub mod io;
pub mod manifest;
pub mod model;
pub mod noise;
pub mod quadrature;
pub mod solver;
pub mod wiener;

pub use error::{Error, Result};
pub use galerkin::Field;
pub use model::ModelSpec;
pub use noise::{NoiseKind, NoiseVariant};
pub use wiener::WienerPath;

/// Improper history integrals are cut after this many time constants.
/// `exp(-40)` is below double-precision resolution of the integrands.
pub const T_TRUNC: f64 = 40.0;

/// Smallest eigenvalue of the Dirichlet Laplacian on (0, 1).
pub const LAMBDA_1: f64 = std::f64::consts::PI * std::f64::consts::PI;
