//! Generating functions of rotation-invariant Hermitian random-matrix
//! ensembles, computed by Monte Carlo, by eigenvalue-space determinants and by
//! superspace integrals, plus an exact Grassmann algebra for checking the
//! superanalysis identities that connect them.

pub mod detkernels;
pub mod driver;
pub mod distdet;
pub mod ensembles;
pub mod error;
pub mod grassmann;
pub mod linalg;
pub mod quadrature;
pub mod superfns;
pub mod susyreps;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Distance below which two arguments are treated as coincident.
pub const TOL_EQUAL: f64 = 1e-12;
