use num_complex::Complex64 as C64;

/// `p(x) * exp(a x^2 + b x)` with complex polynomial coefficients in ascending
/// order. Closed under differentiation, so high-order derivatives are exact.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpPoly {
    pub poly: Vec<C64>,
    pub a: C64,
    pub b: C64,
}

impl ExpPoly {
    pub fn new(poly: Vec<C64>, a: C64, b: C64) -> Self {
        let mut p = ExpPoly { poly, a, b };
        p.trim();
        p
    }

    /// `exp(a x^2 + b x)`.
    pub fn exponential(a: C64, b: C64) -> Self {
        ExpPoly::new(vec![C64::new(1.0, 0.0)], a, b)
    }

    /// Unit Gaussian `exp(-x^2 / 2)`.
    pub fn gaussian() -> Self {
        ExpPoly::exponential(C64::new(-0.5, 0.0), C64::new(0.0, 0.0))
    }

    fn trim(&mut self) {
        while self.poly.len() > 1 && self.poly.last() == Some(&C64::new(0.0, 0.0)) {
            self.poly.pop();
        }
        if self.poly.is_empty() {
            self.poly.push(C64::new(0.0, 0.0));
        }
    }

    pub fn degree(&self) -> usize {
        self.poly.len() - 1
    }

    /// Multiply the polynomial part by another polynomial.
    pub fn mul_poly(&self, q: &[C64]) -> Self {
        let mut out = vec![C64::new(0.0, 0.0); self.poly.len() + q.len().max(1) - 1];
        for (i, &pi) in self.poly.iter().enumerate() {
            for (j, &qj) in q.iter().enumerate() {
                out[i + j] += pi * qj;
            }
        }
        ExpPoly::new(out, self.a, self.b)
    }

    /// `d/dx [p e^q] = (p' + (2 a x + b) p) e^q`.
    pub fn diff(&self) -> Self {
        let n = self.poly.len();
        let mut out = vec![C64::new(0.0, 0.0); n + 1];
        for (k, &c) in self.poly.iter().enumerate() {
            if k > 0 {
                out[k - 1] += c * k as f64;
            }
            out[k] += self.b * c;
            out[k + 1] += self.a * 2.0 * c;
        }
        ExpPoly::new(out, self.a, self.b)
    }

    pub fn diff_n(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |p, _| p.diff())
    }

    pub fn eval_poly(&self, x: C64) -> C64 {
        self.poly.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    pub fn eval(&self, x: f64) -> C64 {
        self.eval_complex(C64::new(x, 0.0))
    }

    pub fn eval_complex(&self, x: C64) -> C64 {
        self.eval_poly(x) * (self.a * x * x + self.b * x).exp()
    }

    /// Derivatives `g^(j)(0)` for `j = 0..=n`.
    pub fn derivatives_at_zero(&self, n: usize) -> Vec<C64> {
        let mut out = Vec::with_capacity(n + 1);
        let mut p = self.clone();
        for _ in 0..=n {
            out.push(p.poly[0]);
            p = p.diff();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_derivatives_at_zero() {
        let g = ExpPoly::gaussian();
        assert_eq!(g.diff().eval(0.0), C64::new(0.0, 0.0));
        assert!((g.diff_n(2).eval(0.0) - C64::new(-1.0, 0.0)).norm() < 1e-15);
        let xg = g.mul_poly(&[C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        assert!((xg.diff_n(3).eval(0.0) - C64::new(-3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn composition_is_exact() {
        let p = ExpPoly::new(
            vec![C64::new(0.3, 1.0), C64::new(-2.0, 0.5)],
            C64::new(-0.5, 0.2),
            C64::new(0.1, -0.7),
        );
        for m in 0..4 {
            for n in 0..4 {
                assert_eq!(p.diff_n(m).diff_n(n), p.diff_n(m + n));
            }
        }
    }

    #[test]
    fn hermite_values() {
        // (-1)^n He_n(0) for n = 0..6
        let d = ExpPoly::gaussian().derivatives_at_zero(6);
        let expected = [1.0, 0.0, -1.0, 0.0, 3.0, 0.0, -15.0];
        for (v, e) in d.iter().zip(expected) {
            assert!((v - C64::new(e, 0.0)).norm() < 1e-12);
        }
    }
}
