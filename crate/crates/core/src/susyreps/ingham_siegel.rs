use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{
    boundary_kernel, check_lower_half_plane, exp_poly_add, half_line_moment, half_line_spec, source_exponential, w,
    GaussianClass,
};
use crate::ensembles::{EnsembleSpec, SourceKappa};
use crate::error::{Error, Result};
use crate::grassmann::{GrassmannElement, GrassmannMatrix, SuperMeasure};
use crate::linalg::{binomial, factorial, sign_pow};
use crate::quadrature::{fd_derivative, integrate_1d, ExpPoly};
use crate::superfns::{SuperFn, DEFAULT_PSI};

/// Which of the two equivalent expressions of `Z_{1/1}` to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Z11Form {
    /// Efetov-Wegner constant plus the supergroup integral.
    EfetovWegner,
    /// Single integral with the first-order operator acting on everything.
    CombinedDerivative,
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::validation("matrix dimension must be at least 1"));
    }
    Ok(())
}

fn check_sources(kappa1: C64, kappa2: C64) -> Result<()> {
    check_lower_half_plane(&SourceKappa::new(vec![kappa1], vec![kappa2]))
}

/// `(-1)^N/(N-1)! int_0^inf r1^N (e^{-i psi} d/dr2)^{N-1} delta(r2)
///  [B (d/dr1 + e^{-i psi} d/dr2) - e^{-i psi}/r1 d/dr2] F1(r1) h(r2)`
/// with `B = 1/(r1 - w r2)`, the Dirac pairing done analytically.
fn boundary_term(f1: &ExpPoly, h: &ExpPoly, n: usize) -> Result<C64> {
    let m = n - 1;
    let w = w();
    let wbar = w.inv();
    let hd = h.derivatives_at_zero(m + 1);
    let df1 = f1.diff();
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..=m {
        let c = binomial(m, j) * factorial(j) * w.powi(j as i32);
        acc += c * (hd[m - j] * half_line_moment(&df1, n - j - 1)? + wbar * hd[m - j + 1] * half_line_moment(f1, n - j - 1)?);
    }
    acc -= wbar * hd[m + 1] * half_line_moment(f1, n - 1)?;
    // (-1)^N (-w^{-1})^{N-1} = -w^{-(N-1)}
    Ok(-wbar.powi(m as i32) / factorial(m) * acc)
}

/// Action of the `k = 1` Ingham-Siegel distribution on a rotation-invariant
/// superfunction: `int F(rho) I_1^{(N)}(rho) d[rho]`, which equals `F(0)`.
/// The delta derivatives are reduced exactly on the `ExpPoly` factors.
pub fn ingham_siegel_action(f: &SuperFn, n: usize, k: usize) -> Result<C64> {
    check_n(n)?;
    if k != 1 {
        return Err(Error::validation("the Ingham-Siegel action is implemented for k = 1"));
    }
    if f.psi() != DEFAULT_PSI {
        return Err(Error::validation("the Ingham-Siegel action uses the Wick angle pi/2"));
    }
    let mut acc = C64::new(0.0, 0.0);
    for t in f.terms() {
        acc += t.coeff * boundary_term(&t.bos, &t.ferm, n)?;
    }
    Ok(acc)
}

/// Efetov-Wegner boundary term of `Z_{1/1}`; it equals 1 for every source.
pub fn efetov_wegner_z2(ens: &EnsembleSpec, n: usize, kappa1: C64, kappa2: C64) -> Result<C64> {
    check_n(n)?;
    check_sources(kappa1, kappa2)?;
    let g = GaussianClass::of(ens)?;
    boundary_term(&g.bos(kappa1), &g.ferm(kappa2), n)
}

/// `Z_{1/1}^{(N)}` from its superspace representation.
pub fn z11_superspace(ens: &EnsembleSpec, n: usize, kappa1: C64, kappa2: C64, form: Z11Form) -> Result<C64> {
    check_n(n)?;
    check_sources(kappa1, kappa2)?;
    let g = GaussianClass::of(ens)?;
    let (f1, h) = (g.bos(kappa1), g.ferm(kappa2));
    match form {
        Z11Form::EfetovWegner => {
            if kappa1 == kappa2 {
                return Ok(C64::new(1.0, 0.0));
            }
            Ok(C64::new(1.0, 0.0) + (kappa1 - kappa2) * boundary_kernel(&f1, &h, n)?)
        }
        Z11Form::CombinedDerivative => {
            let m = n - 1;
            let w = w();
            let hd = h.derivatives_at_zero(m);
            let lead = exp_poly_add(&f1.diff(), &f1, C64::i() * (kappa1 - kappa2));
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..=m {
                let c = binomial(m, j) * factorial(j) * w.powi(j as i32) * hd[m - j];
                let mut v = half_line_moment(&lead, n - j - 1)?;
                // N r1^{N-1} B - r1^N B^2 leaves (N - j - 1) r1^{N-j-2}
                if n > j + 1 {
                    v += (n - j - 1) as f64 * half_line_moment(&f1, n - j - 2)?;
                }
                acc += c * v;
            }
            Ok(-w.inv().powi(m as i32) / factorial(m) * acc)
        }
    }
}

/// How the `r2` derivatives at the origin are taken on the Grassmann-integrated
/// function.
#[derive(Debug, Clone, Copy, PartialEq)]
enum DeltaReduction {
    /// Trapezoidal Cauchy integral on a circle inside the pole at `r2 = r1 / w`.
    Contour,
    /// Central stencil of the given base width, capped at `r1 / 8`.
    Stencil(f64),
}

const CONTOUR_NODES: usize = 64;

/// `rho_hat = [[r1, w^{1/2} eta*], [w^{1/2} eta, w (r2 + eta eta* / r1)]]`.
fn rho_hat(r1: f64, r2: C64) -> GrassmannMatrix {
    let w = w();
    let half = C64::from_polar(1.0, DEFAULT_PSI / 2.0);
    let eta = GrassmannElement::generator(2, 0);
    let eta_star = GrassmannElement::generator(2, 1);
    let shift = (&eta * &eta_star).scale(C64::new(1.0 / r1, 0.0));
    let ff = (&GrassmannElement::scalar(2, r2) + &shift).scale(w);
    GrassmannMatrix::new(1, 1, vec![GrassmannElement::scalar(2, C64::new(r1, 0.0)), eta_star.scale(half), eta.scale(half), ff])
        .expect("grading is correct by construction")
}

/// `(-1)^N 2 pi/(N-1)! int g(rho_hat) r1^N (w^{-1} d/dr2)^{N-1} w^{-1} delta(r2) d[rho]`
/// with the Berezin integral done by the engine and `r1` by quadrature.
fn hubbard_stratonovich_functional<G>(g: G, n: usize, reduction: DeltaReduction) -> Result<C64>
where
    G: Fn(&GrassmannMatrix) -> Result<GrassmannElement>,
{
    let m = n - 1;
    let w = w();
    let measure = SuperMeasure::new(1, 1, DEFAULT_PSI);
    let failure = std::cell::RefCell::new(None::<Error>);
    let record = |e: Error| {
        failure.borrow_mut().get_or_insert(e);
        C64::new(0.0, 0.0)
    };
    let reduced = |r1: f64, r2: C64| -> Result<C64> { measure.integrate(&g(&rho_hat(r1, r2))?) };
    let integrand = |r1: f64| -> C64 {
        let deriv = if m == 0 {
            reduced(r1, C64::new(0.0, 0.0))
        } else {
            match reduction {
                DeltaReduction::Contour => {
                    let radius = 0.5 * r1.min(1.0);
                    let mut acc = Ok(C64::new(0.0, 0.0));
                    for j in 0..CONTOUR_NODES {
                        let theta = 2.0 * PI * j as f64 / CONTOUR_NODES as f64;
                        acc = acc.and_then(|a| {
                            Ok(a + reduced(r1, C64::from_polar(radius, theta))?
                                * C64::from_polar(1.0, -(m as f64) * theta))
                        });
                    }
                    acc.map(|a| a * factorial(m) / (CONTOUR_NODES as f64 * radius.powi(m as i32)))
                }
                DeltaReduction::Stencil(h) => {
                    let inner_err = std::cell::RefCell::new(None::<Error>);
                    let v = fd_derivative(
                        |t| {
                            reduced(r1, C64::new(t, 0.0)).unwrap_or_else(|e| {
                                inner_err.borrow_mut().get_or_insert(e);
                                C64::new(0.0, 0.0)
                            })
                        },
                        0.0,
                        m,
                        h.min(r1 / 8.0),
                    );
                    match (inner_err.into_inner(), v) {
                        (Some(e), _) => Err(e),
                        (None, v) => v.map(|v| v.value),
                    }
                }
            }
        };
        match deriv {
            // pairing with (w^{-1} d/dr2)^m w^{-1} delta, times w from d[rho2]
            Ok(d) => d * (-w.inv()).powi(m as i32) * r1.powi(n as i32),
            Err(e) => record(e),
        }
    };
    // the stencil is noisy where r1 is comparable to its width
    let tol = match reduction {
        DeltaReduction::Contour => 1e-11,
        DeltaReduction::Stencil(_) => 1e-8,
    };
    let est = integrate_1d(integrand, &half_line_spec().with_rel_tol(tol))?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(sign_pow(n as i64) * 2.0 * PI / factorial(m) * est.value)
}

/// Brute-force counterpart of `ingham_siegel_action`: Grassmann integration
/// of `F(rho_hat)` and a finite-difference stencil of base width `h` for the
/// delta derivatives.
pub fn ingham_siegel_action_fd(f: &SuperFn, n: usize, h: f64) -> Result<C64> {
    check_n(n)?;
    if f.psi() != DEFAULT_PSI {
        return Err(Error::validation("the Ingham-Siegel action uses the Wick angle pi/2"));
    }
    hubbard_stratonovich_functional(|rho| f.on_u11(rho), n, DeltaReduction::Stencil(h))
}

/// `Z_{1/1}^{(N)}` from the Hubbard-Stratonovich supermatrix integral taken
/// literally: Grassmann expansion of `Phi(rho_hat) exp(-i Str kappa rho_hat)`,
/// Berezin integration, delta-derivative reduction and the `r1` integral.
pub fn z11_hubbard_stratonovich_grassmann(ens: &EnsembleSpec, n: usize, kappa1: C64, kappa2: C64) -> Result<C64> {
    check_n(n)?;
    check_sources(kappa1, kappa2)?;
    let g = GaussianClass::of(ens)?;
    hubbard_stratonovich_functional(
        |rho| {
            // Phi(rho) = exp(a Str rho^2 + b Str rho) for f = exp(a x^2 + b x)
            let exponent = &rho.mul(rho)?.str().scale(g.a) + &rho.str().scale(g.b);
            Ok(&exponent.gexp() * &source_exponential(rho, kappa1, kappa2)?)
        },
        n,
        DeltaReduction::Contour,
    )
}
