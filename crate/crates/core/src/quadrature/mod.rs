//! Numerical kernels shared by every route: adaptive quadrature on truncated
//! lines, the `ExpPoly` closed class and Richardson finite differences.

mod exp_poly;
mod finite_diff;
mod gauss_kronrod;

pub use exp_poly::ExpPoly;
pub use finite_diff::{fd_derivative, fd_partial, FdEstimate, DEFAULT_FD_STEP};
pub use gauss_kronrod::Estimate;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Integration domain before truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    FullLine,
    /// `[0, inf)` for `+1`, `(-inf, 0]` for `-1`.
    HalfLine(i8),
    Interval(f64, f64),
}

/// Tolerances and domain for one 1D integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub domain: Domain,
    /// Cutoff radius for infinite domains, in units of the unit Gaussian width.
    pub truncation: f64,
    pub max_panels: usize,
}

/// Truncation radius for unit-Gaussian damped integrands: `exp(-72)` is below
/// `1e-16` of the peak even after polynomial growth of moderate degree.
pub const DEFAULT_TRUNCATION: f64 = 12.0;

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            domain: Domain::FullLine,
            truncation: DEFAULT_TRUNCATION,
            max_panels: 4000,
        }
    }
}

impl QuadratureSpec {
    pub fn full_line() -> Self {
        Self::default()
    }

    pub fn half_line(sign: i8) -> Self {
        QuadratureSpec {
            domain: Domain::HalfLine(if sign < 0 { -1 } else { 1 }),
            ..Self::default()
        }
    }

    pub fn interval(a: f64, b: f64) -> Self {
        QuadratureSpec {
            domain: Domain::Interval(a, b),
            ..Self::default()
        }
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_truncation(mut self, truncation: f64) -> Self {
        self.truncation = truncation;
        self
    }

    /// Finite bounds actually integrated over.
    pub fn bounds(&self) -> (f64, f64) {
        let t = self.truncation;
        match self.domain {
            Domain::FullLine => (-t, t),
            Domain::HalfLine(s) if s < 0 => (-t, 0.0),
            Domain::HalfLine(_) => (0.0, t),
            Domain::Interval(a, b) => (a, b),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::validation("quadrature tolerances must be positive"));
        }
        if !(self.truncation.is_finite() && self.truncation > 0.0) {
            return Err(Error::validation("truncation radius must be finite and positive"));
        }
        Ok(())
    }
}

/// Adaptive Gauss-Kronrod estimate of `int g` over the truncated domain.
pub fn integrate_1d<F: Fn(f64) -> C64>(g: F, spec: &QuadratureSpec) -> Result<Estimate> {
    spec.validate()?;
    let (a, b) = spec.bounds();
    let panels = match spec.domain {
        Domain::FullLine => 16,
        Domain::HalfLine(_) => 8,
        Domain::Interval(..) => 4,
    };
    let est = gauss_kronrod::adaptive(&g, a, b, spec.rel_tol, spec.abs_tol, panels, spec.max_panels)?;
    if !est.value.re.is_finite() || !est.value.im.is_finite() {
        return Err(Error::numerical("quadrature produced a non-finite value", f64::INFINITY));
    }
    Ok(est)
}

/// Nested tensor integral `int dx int dy g(x, y)`; the inner tolerance is
/// tightened so its error does not dominate the outer estimate.
pub fn integrate_2d<F: Fn(f64, f64) -> C64>(
    g: F,
    outer: &QuadratureSpec,
    inner: &QuadratureSpec,
) -> Result<Estimate> {
    let inner = QuadratureSpec {
        rel_tol: inner.rel_tol * 0.1,
        abs_tol: inner.abs_tol * 0.1,
        ..*inner
    };
    let failure = std::cell::RefCell::new(None::<Error>);
    let inner_err = std::cell::Cell::new(0.0f64);
    let evals = std::cell::Cell::new(0usize);
    let outer_fn = |x: f64| -> C64 {
        match integrate_1d(|y| g(x, y), &inner) {
            Ok(e) => {
                inner_err.set(inner_err.get().max(e.error));
                evals.set(evals.get() + e.evaluations);
                e.value
            }
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                C64::new(0.0, 0.0)
            }
        }
    };
    let est = integrate_1d(outer_fn, outer)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let (a, b) = outer.bounds();
    Ok(Estimate {
        value: est.value,
        error: est.error + inner_err.get() * (b - a).abs(),
        evaluations: evals.get(),
    })
}

/// Integral over the plane in polar coordinates, `int rho drho dtheta g(rho, theta)`.
/// Used for integrands with an integrable `1/|z|` singularity at the origin.
pub fn integrate_polar<F: Fn(f64, f64) -> C64>(g: F, radial: &QuadratureSpec) -> Result<Estimate> {
    let radial = QuadratureSpec {
        domain: Domain::HalfLine(1),
        ..*radial
    };
    let angular = QuadratureSpec::interval(0.0, std::f64::consts::TAU)
        .with_rel_tol(radial.rel_tol)
        .with_abs_tol(radial.abs_tol);
    integrate_2d(|rho, theta| g(rho, theta) * rho, &radial, &angular)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_full_line() {
        let e = integrate_1d(|x| C64::new((-x * x / 2.0).exp(), 0.0), &QuadratureSpec::full_line()).unwrap();
        assert!((e.value.re - (2.0 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn half_line_first_moment() {
        let e = integrate_1d(|x| C64::new(x * (-x * x / 2.0).exp(), 0.0), &QuadratureSpec::half_line(1))
            .unwrap();
        assert!((e.value.re - 1.0).abs() < 1e-12);
        let e = integrate_1d(|x| C64::new(x * (-x * x / 2.0).exp(), 0.0), &QuadratureSpec::half_line(-1))
            .unwrap();
        assert!((e.value.re + 1.0).abs() < 1e-12);
    }

    #[test]
    fn shifted_gaussian_fourier() {
        let e = integrate_1d(
            |x| (C64::new(-x * x / 2.0, -0.3 * x)).exp(),
            &QuadratureSpec::full_line(),
        )
        .unwrap();
        let exact = (2.0 * PI).sqrt() * (-0.045f64).exp();
        assert!((e.value - exact).norm() < 1e-10);
    }

    #[test]
    fn truncation_matches_wider_reference() {
        let g = |x: f64| C64::new(-x * x / 2.0, 0.7 * x).exp() * (1.0 + x * x);
        let a = integrate_1d(g, &QuadratureSpec::full_line()).unwrap();
        let b = integrate_1d(g, &QuadratureSpec::full_line().with_truncation(16.0)).unwrap();
        assert!((a.value - b.value).norm() < 1e-12);
    }

    #[test]
    fn error_estimate_is_conservative() {
        let cases: Vec<(Box<dyn Fn(f64) -> C64>, QuadratureSpec, C64)> = vec![
            (
                Box::new(|x| C64::new((-x * x / 2.0).exp(), 0.0)),
                QuadratureSpec::full_line().with_rel_tol(1e-6),
                C64::new((2.0 * PI).sqrt(), 0.0),
            ),
            (
                Box::new(|x| C64::new(x * x * (-x * x / 2.0).exp(), 0.0)),
                QuadratureSpec::full_line().with_rel_tol(1e-5),
                C64::new((2.0 * PI).sqrt(), 0.0),
            ),
            (
                Box::new(|x| C64::new(-x * x / 2.0, -1.5 * x).exp()),
                QuadratureSpec::full_line().with_rel_tol(1e-4),
                C64::new((2.0 * PI).sqrt() * (-1.125f64).exp(), 0.0),
            ),
        ];
        for (g, spec, exact) in cases {
            let e = integrate_1d(g, &spec).unwrap();
            assert!((e.value - exact).norm() <= e.error + 1e-15);
        }
    }

    #[test]
    fn halving_tolerance_is_stable() {
        let g = |x: f64| C64::new(-x * x / 2.0, -0.8 * x).exp() * x.powi(3);
        for tol in [1e-4, 1e-6, 1e-8] {
            let a = integrate_1d(g, &QuadratureSpec::full_line().with_rel_tol(tol)).unwrap();
            let b = integrate_1d(g, &QuadratureSpec::full_line().with_rel_tol(tol / 2.0)).unwrap();
            assert!((a.value - b.value).norm() <= tol * b.value.norm().max(1e-300));
        }
    }

    #[test]
    fn polar_gaussian() {
        let e = integrate_polar(|rho, _| C64::new((-rho * rho / 2.0).exp(), 0.0), &QuadratureSpec::default())
            .unwrap();
        assert!((e.value.re - 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn nested_matches_product() {
        let inner = QuadratureSpec::full_line();
        let e = integrate_2d(
            |x, y| C64::new(-(x * x + y * y) / 2.0, 0.2 * x - 0.1 * y).exp(),
            &QuadratureSpec::half_line(1),
            &inner,
        )
        .unwrap();
        let gx = integrate_1d(|x| C64::new(-x * x / 2.0, 0.2 * x).exp(), &QuadratureSpec::half_line(1)).unwrap();
        let gy = integrate_1d(|y| C64::new(-y * y / 2.0, -0.1 * y).exp(), &inner).unwrap();
        assert!((e.value - gx.value * gy.value).norm() < 1e-9);
    }

    #[test]
    fn bad_tolerance_is_rejected() {
        let r = integrate_1d(|_| C64::new(1.0, 0.0), &QuadratureSpec::full_line().with_rel_tol(0.0));
        assert!(matches!(r, Err(Error::Validation(_))));
    }
}
