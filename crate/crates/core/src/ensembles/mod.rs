//! Ensemble definitions, matrix samplers and the brute-force Monte Carlo
//! estimators that serve as the reference for every other route.

mod monte_carlo;
mod sampling;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::ExpPoly;

pub use monte_carlo::{
    mc_external_field, mc_generating_function, mc_hciz, mc_mean, MCEstimate, CHUNK_SIZE,
};
pub use sampling::{sample_complex_normal, sample_gue, sample_haar_unitary};

/// Scalar factor `f` of a factorizing characteristic function,
/// `FP(K) = prod_j f(k_j)` over the eigenvalues of `K`.
pub trait CharFactor: Send + Sync {
    fn value(&self, x: f64) -> C64;

    /// n-th derivative at an arbitrary real point.
    fn deriv(&self, n: usize, x: f64) -> C64;

    /// Closed form as `ExpPoly` when one exists, enabling exact derivatives.
    fn as_exp_poly(&self) -> Option<ExpPoly> {
        None
    }
}

/// `f(x) = exp(-x^2/2)`, the characteristic factor of the unit-variance GUE.
#[derive(Debug, Clone, Copy, Default)]
pub struct GaussianFactor;

impl CharFactor for GaussianFactor {
    fn value(&self, x: f64) -> C64 {
        C64::new((-0.5 * x * x).exp(), 0.0)
    }

    fn deriv(&self, n: usize, x: f64) -> C64 {
        // f^(n)(x) = (-1)^n He_n(x) f(x)
        let (mut h0, mut h1) = (1.0, x);
        let he = match n {
            0 => 1.0,
            1 => x,
            _ => {
                for k in 1..n {
                    let h2 = x * h1 - k as f64 * h0;
                    h0 = h1;
                    h1 = h2;
                }
                h1
            }
        };
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        C64::new(sign * he * (-0.5 * x * x).exp(), 0.0)
    }

    fn as_exp_poly(&self) -> Option<ExpPoly> {
        Some(ExpPoly::gaussian())
    }
}

/// Draws Hermitian matrices from `P^(N)`.
pub trait MatrixSampler: Send + Sync {
    fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GueSampler;

impl MatrixSampler for GueSampler {
    fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
        sample_gue(n, rng)
    }
}

/// A rotation-invariant ensemble with factorizing characteristic function.
#[derive(Clone)]
pub struct EnsembleSpec {
    n: usize,
    name: String,
    factor: Arc<dyn CharFactor>,
    sampler: Arc<dyn MatrixSampler>,
}

impl fmt::Debug for EnsembleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EnsembleSpec")
            .field("n", &self.n)
            .field("name", &self.name)
            .finish()
    }
}

impl EnsembleSpec {
    pub fn new(
        n: usize,
        name: impl Into<String>,
        factor: Arc<dyn CharFactor>,
        sampler: Arc<dyn MatrixSampler>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::validation("matrix dimension must be at least 1"));
        }
        let f0 = factor.value(0.0);
        if (f0 - C64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(Error::validation(format!(
                "characteristic factor must be unity at zero, got {f0}"
            )));
        }
        Ok(EnsembleSpec {
            n,
            name: name.into(),
            factor,
            sampler,
        })
    }

    /// Unit-variance GUE, `P(H) ~ exp(-tr H^2 / 2)`.
    pub fn gue(n: usize) -> Result<Self> {
        Self::new(n, "gue", Arc::new(GaussianFactor), Arc::new(GueSampler))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn factor(&self) -> &dyn CharFactor {
        self.factor.as_ref()
    }

    pub fn sampler(&self) -> &dyn MatrixSampler {
        self.sampler.as_ref()
    }

    pub fn is_gaussian(&self) -> bool {
        self.name == "gue"
    }

    /// Same ensemble at a different matrix dimension.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::validation("matrix dimension must be at least 1"));
        }
        Ok(EnsembleSpec { n, ..self.clone() })
    }
}

/// Diagonal source `kappa = diag(kappa_1, kappa_2)`: `bos` sits in the
/// denominators of the generating function, `ferm` in the numerators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceKappa {
    pub bos: Vec<C64>,
    pub ferm: Vec<C64>,
}

impl SourceKappa {
    pub fn new(bos: Vec<C64>, ferm: Vec<C64>) -> Self {
        SourceKappa { bos, ferm }
    }

    pub fn k1(&self) -> usize {
        self.bos.len()
    }

    pub fn k2(&self) -> usize {
        self.ferm.len()
    }

    /// `L_j = -sign(Im kappa_{j1})`; zero for a real entry.
    pub fn sign(&self, j: usize) -> i8 {
        imag_sign(self.bos[j])
    }

    pub fn signs(&self) -> Vec<i8> {
        (0..self.k1()).map(|j| self.sign(j)).collect()
    }

    /// Every bosonic entry strictly off the real axis.
    pub fn check_off_axis(&self) -> Result<()> {
        for (j, k) in self.bos.iter().enumerate() {
            if k.im == 0.0 || !k.im.is_finite() || !k.re.is_finite() {
                return Err(Error::validation(format!(
                    "bosonic source {j} = {k} must have a nonzero finite imaginary part"
                )));
            }
        }
        if self.ferm.iter().any(|k| !k.re.is_finite() || !k.im.is_finite()) {
            return Err(Error::validation("fermionic sources must be finite"));
        }
        Ok(())
    }

    /// `k2 <= k1 <= N`, the range where the determinantal formula applies.
    pub fn check_dimensions(&self, n: usize) -> Result<()> {
        if self.k2() > self.k1() || self.k1() > n {
            return Err(Error::validation(format!(
                "need k2 <= k1 <= N, got k1 = {}, k2 = {}, N = {n}",
                self.k1(),
                self.k2()
            )));
        }
        Ok(())
    }

    pub fn conj(&self) -> Self {
        SourceKappa {
            bos: self.bos.iter().map(|k| k.conj()).collect(),
            ferm: self.ferm.iter().map(|k| k.conj()).collect(),
        }
    }
}

pub(crate) fn imag_sign(k: C64) -> i8 {
    if k.im < 0.0 {
        1
    } else if k.im > 0.0 {
        -1
    } else {
        0
    }
}

/// Deterministic external matrix `alpha H0`, with `H0` given by its eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalField {
    pub alpha: f64,
    pub e0: Vec<f64>,
}

impl ExternalField {
    pub fn new(alpha: f64, e0: Vec<f64>) -> Self {
        ExternalField { alpha, e0 }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if self.e0.len() != n {
            return Err(Error::validation(format!(
                "external field needs {n} eigenvalues, got {}",
                self.e0.len()
            )));
        }
        if !self.alpha.is_finite() || self.e0.iter().any(|e| !e.is_finite()) {
            return Err(Error::validation("external field must be finite"));
        }
        for a in 0..n {
            for b in a + 1..n {
                if (self.e0[a] - self.e0[b]).abs() <= crate::TOL_EQUAL {
                    return Err(Error::validation("external field eigenvalues must be pairwise distinct"));
                }
            }
        }
        Ok(())
    }
}
