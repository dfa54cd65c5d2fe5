//! Galerkin boundary elements for the perfect-conductor scattering problem
//! and the large-conductivity (skin-effect) expansion of the eddy-current
//! transmission problem.
//!
//! The exterior field is represented by single layer potentials of an
//! unknown surface current `J` (lowest-order Raviart–Thomas space) and a
//! scalar density `M` (continuous bilinear space):
//!
//! ```text
//! E = V_α(J) + grad V_α(M),   H = curl V_α(J)
//! ```
//!
//! The densities solve the symmetric saddle system `[[A, Bᵀ], [B, C]]`.
//! Higher expansion orders reuse the same solver with boundary data built
//! from the magnetic trace of the previous order.

pub mod assembly;
pub mod asymptotics;
pub mod config;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod kernels;
pub mod linsolve;
pub mod quadrature;
pub mod spaces;
pub mod study;

pub use error::{BemError, Result};

/// Real 3-vector.
pub type Vec3 = nalgebra::Vector3<f64>;
/// Complex 3-vector.
pub type CVec3 = nalgebra::Vector3<num_complex::Complex64>;
pub use num_complex::Complex64;
