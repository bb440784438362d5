//! Exact Grassmann algebra with complex coefficients, supermatrices over it,
//! and Berezin integration with the superspace measure conventions.

mod element;
mod matrix;

pub use element::{GrassmannElement, MAX_GENERATORS};
pub use matrix::GrassmannMatrix;

use num_complex::Complex64 as C64;

use crate::error::Result;

/// Normalization carried by every `d eta d eta*` pair of the superspace
/// measure. The single-variable rule stays `int eta d eta = 1`; the factor
/// `1/(2 pi)` per pair is what makes the Gaussian superintegrals come out
/// normalized (see the ledger for the derivation).
pub const PAIR_NORMALIZATION: f64 = 1.0 / (2.0 * std::f64::consts::PI);

/// Generator index of `eta_{mn}` (even) and `eta*_{mn}` (odd) for the
/// off-diagonal block of a `k1/k2` supermatrix, row-major over `(m, n)`.
pub fn pair_indices(k2: usize, m: usize, n: usize) -> (usize, usize) {
    let p = m * k2 + n;
    (2 * p, 2 * p + 1)
}

/// Grassmann part of the flat measure on `k1/k2` supermatrices: the ordered
/// product of `d eta_{mn} d eta*_{mn}` over the off-diagonal block, with the
/// Wick phase `exp(-i k1 k2 psi)` and the pair normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperMeasure {
    pub k1: usize,
    pub k2: usize,
    pub psi: f64,
}

impl SuperMeasure {
    pub fn new(k1: usize, k2: usize, psi: f64) -> Self {
        SuperMeasure { k1, k2, psi }
    }

    pub fn n_gen(&self) -> usize {
        2 * self.k1 * self.k2
    }

    /// Integration order, innermost first.
    pub fn order(&self) -> Vec<usize> {
        (0..self.n_gen()).collect()
    }

    /// Constant factor multiplying the Berezin integral.
    pub fn prefactor(&self) -> C64 {
        let pairs = (self.k1 * self.k2) as f64;
        C64::from_polar(PAIR_NORMALIZATION.powf(pairs), -pairs * self.psi)
    }

    /// Integrate out every generator and return the remaining number.
    pub fn integrate(&self, a: &GrassmannElement) -> Result<C64> {
        Ok(a.berezin_integrate(&self.order())?.body() * self.prefactor())
    }
}
