//! Galerkin boundary element solver for time-harmonic scattering of an
//! acoustic plane wave by an elastic body in two dimensions.
//!
//! The fluid is governed by the Helmholtz equation, the solid by the
//! time-harmonic Navier equation, and the two are coupled on the interface
//! by continuity of normal displacement and traction. Three boundary
//! integral formulations are provided (direct, indirect and Burton-Miller),
//! all discretised with periodic piecewise-linear hats on a polygon.
//! A cylindrical mode expansion for the disc serves as the exact reference.

pub mod assembly;
pub mod error;
pub mod fields;
pub mod kernels;
pub mod linalg;
pub mod material;
pub mod mesh;
pub mod oracle;
pub mod output;
pub mod parallel;
pub mod quadrature;
pub mod specfun;
pub mod systems;

pub use error::{BemError, Result, SpecFunError};
pub use num_complex::Complex64;

/// Crate version, embedded in every CSV header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
