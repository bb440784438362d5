//! Superspace representations of the generating functions: the Ingham-Siegel
//! integral and its normalization, `Z_{1/1}` with its Efetov-Wegner term, and
//! the `k x k` determinant formulas with and without an external field.
//!
//! All routes here integrate the bosonic eigenvalues over the positive half
//! line, which converges only for `Im kappa_b1 < 0`, and use the Wick angle
//! `pi/2` throughout.

mod determinants;
mod ingham_siegel;

pub use determinants::{
    b3_series_tail, generating_function_alpha0, B3_CONSTANT, generating_function_external, generating_function_susy,
    generating_function_susy_expansion, PoleDenominator, SusyOptions,
};
pub use ingham_siegel::{
    efetov_wegner_z2, ingham_siegel_action, ingham_siegel_action_fd, z11_hubbard_stratonovich_grassmann,
    z11_superspace, Z11Form,
};
pub use crate::distdet::DistDetEntry;

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::ensembles::{EnsembleSpec, SourceKappa};
use crate::error::{Error, Result};
use crate::grassmann::{GrassmannElement, GrassmannMatrix};
use crate::linalg::{binomial, factorial, i_pow};
use crate::quadrature::{integrate_1d, ExpPoly, QuadratureSpec};
use crate::superfns::{u11_superintegral, wick_phase, DEFAULT_PSI};

/// Wick phase `e^{i psi}` at the fixed angle of this module.
pub(crate) fn w() -> C64 {
    wick_phase(DEFAULT_PSI)
}

/// `Vol(U(N)) = prod_{j=1}^N 2 pi^j / (j-1)!`.
pub fn vol_unitary(n: usize) -> f64 {
    (1..=n).map(|j| 2.0 * PI.powi(j as i32) / factorial(j - 1)).product()
}

/// Characteristic factor of the form `f(x) = exp(a x^2 + b x)`, the class on
/// which `1/f` is entire and the superspace routes apply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct GaussianClass {
    pub a: C64,
    pub b: C64,
}

impl GaussianClass {
    pub fn of(ens: &EnsembleSpec) -> Result<Self> {
        let p = ens
            .factor()
            .as_exp_poly()
            .ok_or_else(|| Error::validation("superspace routes need a characteristic factor exp(a x^2 + b x)"))?;
        if p.poly.len() != 1 || p.poly[0] != C64::new(1.0, 0.0) {
            return Err(Error::validation(
                "superspace routes need a characteristic factor exp(a x^2 + b x) without polynomial prefactor",
            ));
        }
        Ok(GaussianClass { a: p.a, b: p.b })
    }

    /// `f(r) exp(-i kappa r)`, the bosonic factor.
    pub fn bos(&self, kappa: C64) -> ExpPoly {
        ExpPoly::exponential(self.a, self.b - C64::i() * kappa)
    }

    /// `exp(i w kappa r) / f(w r)`, the fermionic factor in the radial coordinate.
    pub fn ferm(&self, kappa: C64) -> ExpPoly {
        let w = w();
        ExpPoly::exponential(-self.a * w * w, C64::i() * w * kappa - self.b * w)
    }
}

/// Every bosonic source strictly in the lower half plane.
pub(crate) fn check_lower_half_plane(kappa: &SourceKappa) -> Result<()> {
    kappa.check_off_axis()?;
    if let Some(k) = kappa.bos.iter().find(|k| k.im >= 0.0) {
        return Err(Error::validation(format!(
            "superspace routes integrate over the positive half line and need Im kappa_1 < 0, got {k}"
        )));
    }
    Ok(())
}

pub(crate) fn half_line_spec() -> QuadratureSpec {
    QuadratureSpec::half_line(1).with_rel_tol(1e-12)
}

/// `int_0^inf r^p g(r) dr`.
pub(crate) fn half_line_moment(g: &ExpPoly, p: usize) -> Result<C64> {
    Ok(integrate_1d(|r| g.eval(r) * r.powi(p as i32), &half_line_spec())?.value)
}

/// Sum of two `ExpPoly` with the same exponent.
pub(crate) fn exp_poly_add(x: &ExpPoly, y: &ExpPoly, cy: C64) -> ExpPoly {
    debug_assert!(x.a == y.a && x.b == y.b);
    let n = x.poly.len().max(y.poly.len());
    let poly = (0..n)
        .map(|i| x.poly.get(i).copied().unwrap_or_default() + cy * y.poly.get(i).copied().unwrap_or_default())
        .collect();
    ExpPoly::new(poly, x.a, x.b)
}

/// Half-line kernel left after reducing `(e^{-i psi} d/dr2)^{N-1} delta(r2)`
/// against `h(r2) / (r1 - w r2)`:
/// `-i w^{-(N-1)}/(N-1)! int_0^inf r1^N F1(r1) d^{N-1}/dr2^{N-1}[h/(r1 - w r2)]_0 dr1`.
pub(crate) fn boundary_kernel(f1: &ExpPoly, h: &ExpPoly, n: usize) -> Result<C64> {
    let m = n - 1;
    let w = w();
    let hd = h.derivatives_at_zero(m);
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..=m {
        // d^j/dr2^j (r1 - w r2)^{-1} at 0 is j! w^j / r1^{j+1}
        let c = binomial(m, j) * hd[m - j] * factorial(j) * w.powi(j as i32);
        acc += c * half_line_moment(f1, n - j - 1)?;
    }
    Ok(C64::new(0.0, -1.0) * w.inv().powi(m as i32) / factorial(m) * acc)
}

/// Closed form of the Fourier transform of the Gaussian superextension
/// `exp(-Str rho^2 / 2)` over `k/k` supermatrices, including the factor
/// `2^{2k(k-1)}`: `2^{k(k-1)} (-i)^{k^2} exp(-sum (s1^2 + s2^2) / 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierGaussian {
    pub k: usize,
}

pub fn fourier_superext_gaussian(k: usize) -> FourierGaussian {
    FourierGaussian { k }
}

impl FourierGaussian {
    pub fn constant(&self) -> C64 {
        let k = self.k;
        i_pow(-((k * k) as i64)) * 2f64.powi((k * k.saturating_sub(1)) as i32)
    }

    /// Value at the eigenvalues `s1` and radial `s2` of `sigma`.
    pub fn eval(&self, s1: &[f64], s2: &[f64]) -> Result<C64> {
        if s1.len() != self.k || s2.len() != self.k {
            return Err(Error::validation(format!("need {} eigenvalues of each kind", self.k)));
        }
        let q: f64 = s1.iter().chain(s2).map(|s| s * s).sum();
        Ok(self.constant() * (-q / 2.0).exp())
    }
}

/// `int exp(-Str rho^2 / 2 - i Str rho sigma) d[rho]` at `k = 1` for
/// `sigma = diag(s1, e^{-i psi} s2)`, by the Grassmann engine and quadrature.
pub fn fourier_superext_gaussian_grassmann(s1: f64, s2: f64) -> Result<C64> {
    let sigma2 = w().inv() * s2;
    u11_superintegral(
        |rho| {
            let gauss = rho.mul(rho)?.str().scale(C64::new(-0.5, 0.0));
            Ok(&gauss.gexp() * &source_exponential(rho, C64::new(s1, 0.0), sigma2)?)
        },
        DEFAULT_PSI,
        &QuadratureSpec::full_line().with_rel_tol(1e-11),
    )
}

/// `exp(-i Str(rho kappa))` for `kappa = diag(k1, k2)`.
pub(crate) fn source_exponential(rho: &GrassmannMatrix, k1: C64, k2: C64) -> Result<GrassmannElement> {
    let zero = C64::new(0.0, 0.0);
    let k = GrassmannMatrix::numeric(1, 1, rho.n_gen(), &[k1, zero, zero, k2])?;
    Ok(rho.mul(&k)?.str().scale(C64::new(0.0, -1.0)).gexp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_volumes() {
        assert!((vol_unitary(1) - 2.0 * PI).abs() < 1e-13);
        assert!((vol_unitary(2) - 4.0 * PI.powi(3)).abs() < 1e-12);
        assert!((vol_unitary(3) - 8.0 * PI.powi(6) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn fourier_constant_matches_grassmann_integral() {
        let closed = fourier_superext_gaussian(1).eval(&[0.0], &[0.0]).unwrap();
        let oracle = fourier_superext_gaussian_grassmann(0.0, 0.0).unwrap();
        assert!((closed - oracle).norm() < 1e-8, "{closed} vs {oracle}");
        let closed = fourier_superext_gaussian(1).eval(&[0.6], &[-0.3]).unwrap();
        let oracle = fourier_superext_gaussian_grassmann(0.6, -0.3).unwrap();
        assert!((closed - oracle).norm() < 1e-8, "{closed} vs {oracle}");
    }

    #[test]
    fn fourier_gaussian_shape() {
        let fg = fourier_superext_gaussian(1);
        let log_abs = |s: f64| fg.eval(&[s], &[0.2]).unwrap().norm().ln();
        // second difference of a quadratic is constant
        let (d1, d2) = (log_abs(0.5) - 2.0 * log_abs(0.0) + log_abs(-0.5), log_abs(1.5) - 2.0 * log_abs(1.0) + log_abs(0.5));
        assert!((d1 - d2).abs() < 1e-12);
        let a = fourier_superext_gaussian_grassmann(0.4, 0.7).unwrap();
        let b = fourier_superext_gaussian_grassmann(-0.4, -0.7).unwrap();
        assert!((a - b).norm() < 1e-9);
    }

    #[test]
    fn non_gaussian_class_rejected() {
        use crate::ensembles::{CharFactor, GueSampler};
        use std::sync::Arc;
        struct Quartic;
        impl CharFactor for Quartic {
            fn value(&self, x: f64) -> C64 {
                C64::new((-x.powi(4)).exp(), 0.0)
            }
            fn deriv(&self, _: usize, _: f64) -> C64 {
                unimplemented!()
            }
        }
        let ens = EnsembleSpec::new(2, "quartic", Arc::new(Quartic), Arc::new(GueSampler)).unwrap();
        assert!(matches!(GaussianClass::of(&ens), Err(Error::Validation(_))));
    }
}
