use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Upper bound on the number of generators; masks are stored in a `u32`.
pub const MAX_GENERATORS: usize = 16;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Element of the Grassmann algebra over `n_gen` generators. A monomial is a
/// bitmask; bit `i` set means generator `i` is present, and the monomial is
/// the product of its generators in ascending index order.
#[derive(Clone, PartialEq)]
pub struct GrassmannElement {
    n_gen: usize,
    coeffs: BTreeMap<u32, C64>,
}

/// `(-1)^k` as a float.
fn parity_sign(k: u32) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Sign of reordering the concatenation `a b` of two ascending monomials into
/// ascending order: one transposition per pair (i in a, j in b) with i > j.
fn merge_sign(a: u32, b: u32) -> f64 {
    let mut swaps = 0;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    parity_sign(swaps)
}

impl GrassmannElement {
    pub fn zero(n_gen: usize) -> Self {
        assert!(n_gen <= MAX_GENERATORS, "at most {MAX_GENERATORS} generators");
        GrassmannElement {
            n_gen,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn scalar(n_gen: usize, c: C64) -> Self {
        let mut e = Self::zero(n_gen);
        e.insert(0, c);
        e
    }

    pub fn one(n_gen: usize) -> Self {
        Self::scalar(n_gen, ONE)
    }

    /// The single generator with index `i`.
    pub fn generator(n_gen: usize, i: usize) -> Self {
        assert!(i < n_gen, "generator index {i} out of range");
        let mut e = Self::zero(n_gen);
        e.insert(1 << i, ONE);
        e
    }

    /// Build from `(generator indices, coefficient)` pairs; the indices may be
    /// in any order and are sign-normalized. Repeated indices give zero.
    pub fn from_terms(n_gen: usize, terms: &[(&[usize], C64)]) -> Self {
        let mut e = Self::zero(n_gen);
        for (idx, c) in terms {
            let mut m = Self::scalar(n_gen, *c);
            for &i in idx.iter() {
                m = &m * &Self::generator(n_gen, i);
            }
            e = &e + &m;
        }
        e
    }

    fn insert(&mut self, mask: u32, c: C64) {
        if c == ZERO {
            return;
        }
        let slot = self.coeffs.entry(mask).or_insert(ZERO);
        *slot += c;
        if *slot == ZERO {
            self.coeffs.remove(&mask);
        }
    }

    pub fn n_gen(&self) -> usize {
        self.n_gen
    }

    /// Coefficient of the canonical monomial `mask`.
    pub fn coeff(&self, mask: u32) -> C64 {
        self.coeffs.get(&mask).copied().unwrap_or(ZERO)
    }

    /// Numeric (degree zero) part.
    pub fn body(&self) -> C64 {
        self.coeff(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, C64)> + '_ {
        self.coeffs.iter().map(|(&m, &c)| (m, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// True when every monomial has even degree.
    pub fn is_even(&self) -> bool {
        self.coeffs.keys().all(|m| m.count_ones() % 2 == 0)
    }

    /// True when every monomial has odd degree.
    pub fn is_odd(&self) -> bool {
        self.coeffs.keys().all(|m| m.count_ones() % 2 == 1)
    }

    /// Largest coefficient modulus; used for approximate comparisons.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().fold(0.0, |acc, c| acc.max(c.norm()))
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut e = Self::zero(self.n_gen);
        for (&m, &c) in &self.coeffs {
            e.insert(m, c * s);
        }
        e
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n_gen != other.n_gen {
            return Err(Error::validation(format!(
                "Grassmann elements over {} and {} generators",
                self.n_gen, other.n_gen
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut e = self.clone();
        for (&m, &c) in &other.coeffs {
            e.insert(m, c);
        }
        Ok(e)
    }

    /// Graded product with sign normalization to canonical order.
    pub fn gmul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut e = Self::zero(self.n_gen);
        for (&ma, &ca) in &self.coeffs {
            for (&mb, &cb) in &other.coeffs {
                if ma & mb != 0 {
                    continue;
                }
                e.insert(ma | mb, ca * cb * merge_sign(ma, mb));
            }
        }
        Ok(e)
    }

    /// `exp(a)`: `e^body` times the terminating series of the nilpotent part.
    pub fn gexp(&self) -> Self {
        let body = self.body();
        let mut nil = self.clone();
        nil.coeffs.remove(&0);
        let mut sum = Self::one(self.n_gen);
        let mut term = Self::one(self.n_gen);
        for k in 1..=self.n_gen {
            term = (&term * &nil).scale(C64::new(1.0 / k as f64, 0.0));
            if term.is_zero() {
                break;
            }
            sum = &sum + &term;
        }
        sum.scale(body.exp())
    }

    /// Multiplicative inverse; requires a nonzero body.
    pub fn inverse(&self) -> Result<Self> {
        let body = self.body();
        if body.norm() == 0.0 {
            return Err(Error::singular("Grassmann element with zero body is not invertible"));
        }
        // (c + n)^-1 = c^-1 sum_k (-n/c)^k
        let mut x = self.scale(-1.0 / body);
        x.coeffs.remove(&0);
        let mut sum = Self::one(self.n_gen);
        let mut term = Self::one(self.n_gen);
        for _ in 0..self.n_gen {
            term = &term * &x;
            if term.is_zero() {
                break;
            }
            sum = &sum + &term;
        }
        Ok(sum.scale(1.0 / body))
    }

    /// Berezin integration over the listed generators, innermost first: for
    /// each index the generator is anticommuted to the right end of every
    /// monomial and its coefficient is extracted, so that `int eta d eta = 1`.
    pub fn berezin_integrate(&self, order: &[usize]) -> Result<Self> {
        let mut seen = 0u32;
        for &i in order {
            if i >= self.n_gen {
                return Err(Error::validation(format!("generator {i} does not exist")));
            }
            if seen & (1 << i) != 0 {
                return Err(Error::validation(format!("generator {i} integrated twice")));
            }
            seen |= 1 << i;
        }
        let mut cur = self.clone();
        for &i in order {
            let bit = 1u32 << i;
            let mut next = Self::zero(self.n_gen);
            for (&m, &c) in &cur.coeffs {
                if m & bit == 0 {
                    continue;
                }
                let above = (m >> (i + 1)).count_ones();
                next.insert(m & !bit, c * parity_sign(above));
            }
            cur = next;
        }
        Ok(cur)
    }

    /// Left derivative with respect to generator `i`.
    pub fn derivative(&self, i: usize) -> Result<Self> {
        if i >= self.n_gen {
            return Err(Error::validation(format!("generator {i} does not exist")));
        }
        let bit = 1u32 << i;
        let below = bit - 1;
        let mut e = Self::zero(self.n_gen);
        for (&m, &c) in &self.coeffs {
            if m & bit != 0 {
                e.insert(m & !bit, c * parity_sign((m & below).count_ones()));
            }
        }
        Ok(e)
    }

    /// Conjugation of the second kind on paired generators `(2p, 2p+1)`:
    /// `eta -> eta*`, `eta* -> -eta`, coefficients conjugated, factor order
    /// kept. Applying it twice negates odd elements.
    pub fn star(&self) -> Self {
        let mut e = Self::zero(self.n_gen);
        for (&m, &c) in &self.coeffs {
            let mut term = Self::scalar(self.n_gen, c.conj());
            let mut rest = m;
            while rest != 0 {
                let i = rest.trailing_zeros() as usize;
                let partner = i ^ 1;
                let factor = if partner >= self.n_gen {
                    Self::generator(self.n_gen, i)
                } else if i % 2 == 0 {
                    Self::generator(self.n_gen, partner)
                } else {
                    Self::generator(self.n_gen, partner).scale(-ONE)
                };
                term = &term * &factor;
                rest &= rest - 1;
            }
            e = &e + &term;
        }
        e
    }
}

impl fmt::Debug for GrassmannElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&m, &c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i)", c.re, c.im)?;
            for i in 0..self.n_gen {
                if m & (1 << i) != 0 {
                    write!(f, "·g{i}")?;
                }
            }
        }
        Ok(())
    }
}

impl<'a> Add<&'a GrassmannElement> for &'a GrassmannElement {
    type Output = GrassmannElement;
    fn add(self, rhs: &GrassmannElement) -> GrassmannElement {
        self.try_add(rhs).expect("mismatched generator sets")
    }
}

impl<'a> Sub<&'a GrassmannElement> for &'a GrassmannElement {
    type Output = GrassmannElement;
    fn sub(self, rhs: &GrassmannElement) -> GrassmannElement {
        self.try_add(&-rhs).expect("mismatched generator sets")
    }
}

impl<'a> Mul<&'a GrassmannElement> for &'a GrassmannElement {
    type Output = GrassmannElement;
    fn mul(self, rhs: &GrassmannElement) -> GrassmannElement {
        self.gmul(rhs).expect("mismatched generator sets")
    }
}

impl Neg for &GrassmannElement {
    type Output = GrassmannElement;
    fn neg(self) -> GrassmannElement {
        self.scale(-ONE)
    }
}

impl Add for GrassmannElement {
    type Output = GrassmannElement;
    fn add(self, rhs: Self) -> Self {
        &self + &rhs
    }
}

impl Sub for GrassmannElement {
    type Output = GrassmannElement;
    fn sub(self, rhs: Self) -> Self {
        &self - &rhs
    }
}

impl Mul for GrassmannElement {
    type Output = GrassmannElement;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl Neg for GrassmannElement {
    type Output = GrassmannElement;
    fn neg(self) -> Self {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn nilpotent_and_anticommuting() {
        let e = GrassmannElement::generator(2, 0);
        let s = GrassmannElement::generator(2, 1);
        assert!((&e * &e).is_zero());
        assert_eq!(&e * &s, -(&s * &e));
    }

    #[test]
    fn distributivity_example() {
        let one = GrassmannElement::one(2);
        let e = GrassmannElement::generator(2, 0);
        let s = GrassmannElement::generator(2, 1);
        let lhs = &(&one + &e) * &(&one + &s);
        let rhs = &(&(&one + &e) + &s) + &(&e * &s);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn exponential_terminates() {
        let ee = &GrassmannElement::generator(2, 0) * &GrassmannElement::generator(2, 1);
        assert_eq!(GrassmannElement::zero(2).gexp(), GrassmannElement::one(2));
        assert_eq!(ee.gexp(), &GrassmannElement::one(2) + &ee);
        let shifted = &GrassmannElement::scalar(2, c(0.7)) + &ee;
        let want = (&GrassmannElement::one(2) + &ee).scale(c(0.7f64.exp()));
        assert!((&shifted.gexp() - &want).max_abs() < 1e-15);
    }

    #[test]
    fn berezin_basics() {
        let e = GrassmannElement::generator(2, 0);
        assert_eq!(e.berezin_integrate(&[0]).unwrap(), GrassmannElement::one(2));
        assert!(GrassmannElement::one(2).berezin_integrate(&[0]).unwrap().is_zero());
        // eta eta* integrated with d eta d eta* (eta innermost)
        let ee = &e * &GrassmannElement::generator(2, 1);
        assert_eq!(ee.berezin_integrate(&[0, 1]).unwrap().body(), c(-1.0));
        let se = &GrassmannElement::generator(2, 1) * &e;
        assert_eq!(se.berezin_integrate(&[0, 1]).unwrap().body(), c(1.0));
    }

    #[test]
    fn berezin_rejects_repeats() {
        let e = GrassmannElement::generator(2, 0);
        assert!(matches!(e.berezin_integrate(&[0, 0]), Err(Error::Validation(_))));
        assert!(e.berezin_integrate(&[3]).is_err());
    }

    #[test]
    fn mismatched_generators() {
        let a = GrassmannElement::one(2);
        let b = GrassmannElement::one(4);
        assert!(matches!(a.gmul(&b), Err(Error::Validation(_))));
    }

    #[test]
    fn double_star_negates_odd() {
        let e = GrassmannElement::generator(4, 2).scale(C64::new(0.3, 0.4));
        assert_eq!(e.star().star(), -&e);
        let even = &GrassmannElement::generator(4, 0) * &GrassmannElement::generator(4, 1);
        assert_eq!(even.star().star(), even);
    }

    #[test]
    fn inverse_roundtrip() {
        let x = GrassmannElement::from_terms(4, &[(&[], c(2.0)), (&[0, 1], c(0.5)), (&[2, 3], C64::new(0.0, 1.0))]);
        let y = &x * &x.inverse().unwrap();
        assert!((&y - &GrassmannElement::one(4)).max_abs() < 1e-15);
    }
}
