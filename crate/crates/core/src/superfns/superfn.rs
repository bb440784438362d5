use num_complex::Complex64 as C64;

use super::wick_phase;
use crate::error::{Error, Result};
use crate::grassmann::{GrassmannElement, GrassmannMatrix};
use crate::linalg::factorial;
use crate::quadrature::ExpPoly;

/// One product term `coeff * prod_a bos(r_a1) * prod_b ferm(r_b2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductTerm {
    pub coeff: C64,
    pub bos: ExpPoly,
    /// Function of the radial fermionic coordinate `r_b2`; the physical
    /// eigenvalue is `e^{i psi} r_b2`.
    pub ferm: ExpPoly,
}

/// Rotation-invariant superfunction given on the eigenvalues as a finite sum
/// of symmetric product terms. Sums of products keep every eigenvalue integral
/// separable, which is what the determinant expansions rely on.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperFn {
    terms: Vec<ProductTerm>,
    psi: f64,
}

impl SuperFn {
    pub fn product(bos: ExpPoly, ferm: ExpPoly, psi: f64) -> Self {
        SuperFn {
            terms: vec![ProductTerm {
                coeff: C64::new(1.0, 0.0),
                bos,
                ferm,
            }],
            psi,
        }
    }

    /// `exp(-c Str rho^2 / 2)`.
    pub fn gaussian(c: f64, psi: f64) -> Self {
        let w = wick_phase(psi);
        Self::product(
            ExpPoly::exponential(C64::new(-0.5 * c, 0.0), C64::new(0.0, 0.0)),
            ExpPoly::exponential(w * w * (0.5 * c), C64::new(0.0, 0.0)),
            psi,
        )
    }

    /// `exp(-Str rho^2 / 2 + eps Str rho)`.
    pub fn gaussian_linear(eps: f64, psi: f64) -> Self {
        let w = wick_phase(psi);
        Self::product(
            ExpPoly::exponential(C64::new(-0.5, 0.0), C64::new(eps, 0.0)),
            ExpPoly::exponential(w * w * 0.5, -w * eps),
            psi,
        )
    }

    /// Multiply every bosonic factor by the polynomial `q` (ascending order).
    pub fn with_bos_poly(mut self, q: &[C64]) -> Self {
        for t in &mut self.terms {
            t.bos = t.bos.mul_poly(q);
        }
        self
    }

    pub fn scale(mut self, s: C64) -> Self {
        for t in &mut self.terms {
            t.coeff *= s;
        }
        self
    }

    pub fn add(mut self, other: SuperFn) -> Result<Self> {
        if self.psi != other.psi {
            return Err(Error::validation("superfunctions use different Wick angles"));
        }
        self.terms.extend(other.terms);
        Ok(self)
    }

    pub fn terms(&self) -> &[ProductTerm] {
        &self.terms
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    /// Value at bosonic eigenvalues `r1` and radial fermionic coordinates `r2`.
    pub fn eval(&self, r1: &[f64], r2: &[f64]) -> C64 {
        self.terms
            .iter()
            .map(|t| {
                let b: C64 = r1.iter().map(|&x| t.bos.eval(x)).product();
                let f: C64 = r2.iter().map(|&y| t.ferm.eval(y)).product();
                t.coeff * b * f
            })
            .sum()
    }

    pub fn at_origin(&self, k1: usize, k2: usize) -> C64 {
        self.eval(&vec![0.0; k1], &vec![0.0; k2])
    }

    /// `F(rho)` for a `1/1` supermatrix with Grassmann entries, through its
    /// Grassmann-valued eigenvalues `a + s`, `d + s` with `s = bc / (a - d)`.
    pub fn on_u11(&self, rho: &GrassmannMatrix) -> Result<GrassmannElement> {
        if rho.k1() != 1 || rho.k2() != 1 {
            return Err(Error::validation("eigenvalue evaluation is implemented for 1/1 supermatrices"));
        }
        let (a, b, c, d) = (rho.get(0, 0), rho.get(0, 1), rho.get(1, 0), rho.get(1, 1));
        let s = &(b * c) * &(a - d).inverse()?;
        let lam1 = a + &s;
        let lam2 = (d + &s).scale(wick_phase(self.psi).inv());
        let mut acc = GrassmannElement::zero(rho.n_gen());
        for t in &self.terms {
            let v = &taylor(&t.bos, &lam1) * &taylor(&t.ferm, &lam2);
            acc = &acc + &v.scale(t.coeff);
        }
        Ok(acc)
    }
}

/// `g(x + n) = sum_k g^(k)(x) n^k / k!` for an even element with body `x`
/// and nilpotent part `n`.
fn taylor(g: &ExpPoly, lam: &GrassmannElement) -> GrassmannElement {
    let n_gen = lam.n_gen();
    let x = lam.body();
    let nil = lam - &GrassmannElement::scalar(n_gen, x);
    let mut sum = GrassmannElement::zero(n_gen);
    let mut power = GrassmannElement::one(n_gen);
    let mut deriv = g.clone();
    for k in 0..=n_gen / 2 {
        sum = &sum + &power.scale(deriv.eval_complex(x) / factorial(k));
        power = &power * &nil;
        if power.is_zero() {
            break;
        }
        deriv = deriv.diff();
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superfns::{u11_supermatrix, DEFAULT_PSI};

    #[test]
    fn eigenvalue_form_matches_supertrace_form() {
        let f = SuperFn::gaussian(1.3, DEFAULT_PSI);
        let rho = u11_supermatrix(C64::new(0.4, 0.0), C64::new(-0.7, 0.0), DEFAULT_PSI);
        let via_eigen = f.on_u11(&rho).unwrap();
        let str2 = rho.mul(&rho).unwrap().str();
        let direct = str2.scale(C64::new(-0.65, 0.0)).gexp();
        for (m, c) in direct.terms() {
            assert!((via_eigen.coeff(m) - c).norm() < 1e-13);
        }
        assert_eq!(via_eigen.terms().count(), direct.terms().count());
    }

    #[test]
    fn origin_value() {
        let f = SuperFn::gaussian_linear(0.3, DEFAULT_PSI).with_bos_poly(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        assert_eq!(f.at_origin(1, 1), C64::new(1.0, 0.0));
        assert!((f.eval(&[1.0], &[0.0]) - C64::new(2.0 * (-0.5f64 + 0.3).exp(), 0.0)).norm() < 1e-14);
    }
}
