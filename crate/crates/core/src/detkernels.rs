//! Eigenvalue-space closed forms: square-root Berezinians, the moment matrix,
//! the kernels `K^(d)`, the one- and two-point generating functions, the
//! assembled determinantal generating function and the HCIZ closed form.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::ensembles::{CharFactor, EnsembleSpec, SourceKappa};
use crate::error::{Error, Result};
use crate::linalg::{binomial, det, factorial, i_pow, sign_pow, vandermonde};
use crate::quadrature::{integrate_1d, QuadratureSpec};
use crate::TOL_EQUAL;

/// Which of the three equivalent expressions to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BerezinianForm {
    /// Product of Vandermonde factors over the product of cross differences.
    Ratio,
    /// Determinant with `kappa_b1^(p-q) kappa_a2^(q-p) / (kappa_b1 - kappa_a2)` rows.
    Mixed,
    /// Determinant with Cauchy rows `1 / (kappa_b1 - kappa_a2)` and power rows.
    CauchyVdm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerezinianValue {
    pub value: C64,
    pub p: usize,
    pub q: usize,
}

fn check_cross_distinct(bos: &[C64], ferm: &[C64]) -> Result<()> {
    for (a, x) in bos.iter().enumerate() {
        for (b, y) in ferm.iter().enumerate() {
            if (x - y).norm() <= TOL_EQUAL {
                return Err(Error::singular(format!(
                    "bosonic argument {a} coincides with fermionic argument {b}"
                )));
            }
        }
    }
    Ok(())
}

/// Square root of the Berezinian of a `p/q` diagonal supermatrix, `p >= q`.
pub fn sqrt_berezinian(bos: &[C64], ferm: &[C64], form: BerezinianForm) -> Result<BerezinianValue> {
    let (p, q) = (bos.len(), ferm.len());
    if q > p {
        return Err(Error::validation(format!("square-root Berezinian needs p >= q, got {p}/{q}")));
    }
    check_cross_distinct(bos, ferm)?;
    let value = match form {
        BerezinianForm::Ratio => {
            let mut cross = C64::new(1.0, 0.0);
            for x in bos {
                for y in ferm {
                    cross *= x - y;
                }
            }
            vandermonde(bos) * vandermonde(ferm) / cross
        }
        BerezinianForm::Mixed | BerezinianForm::CauchyVdm => {
            let shift = (p - q) as i32;
            let mut rows = Vec::with_capacity(p);
            for y in ferm {
                rows.push(
                    bos.iter()
                        .map(|x| {
                            let c = C64::new(1.0, 0.0) / (x - y);
                            if form == BerezinianForm::Mixed {
                                c * x.powi(shift) * y.powi(-shift)
                            } else {
                                c
                            }
                        })
                        .collect(),
                );
            }
            for a in 0..p - q {
                rows.push(bos.iter().map(|x| x.powi(a as i32)).collect());
            }
            det(&rows) * sign_pow((p * (p.saturating_sub(1)) / 2) as i64)
        }
    };
    Ok(BerezinianValue { value, p, q })
}

/// Moment matrix `M_ab = int f(E) E^(b-1) (i d/dE)^(a-1) delta(E) dE`, which is
/// lower triangular.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentMatrix {
    d: usize,
    entries: Vec<C64>,
}

impl MomentMatrix {
    /// Entries from the derivatives of `f` at zero:
    /// `M_ab = (-i)^(a-1) C(a-1, b-1) (b-1)! f^(a-b)(0)` for `a >= b`.
    pub fn new(factor: &dyn CharFactor, d: usize) -> Self {
        let derivs: Vec<C64> = (0..d).map(|n| factor.deriv(n, 0.0)).collect();
        let mut entries = vec![C64::new(0.0, 0.0); d * d];
        for a in 1..=d {
            for b in 1..=a {
                entries[(a - 1) * d + (b - 1)] = i_pow(-(a as i64 - 1))
                    * binomial(a - 1, b - 1)
                    * factorial(b - 1)
                    * derivs[a - b];
            }
        }
        MomentMatrix { d, entries }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Entry with 1-based indices as in the formulas.
    pub fn get(&self, a: usize, b: usize) -> C64 {
        self.entries[(a - 1) * self.d + (b - 1)]
    }

    pub fn determinant(&self) -> C64 {
        (1..=self.d).map(|j| self.get(j, j)).product()
    }

    /// Solve `M x = y` by forward substitution.
    pub fn solve(&self, y: &[C64]) -> Result<Vec<C64>> {
        let d = self.d;
        let mut x = vec![C64::new(0.0, 0.0); d];
        for a in 1..=d {
            let mut acc = y[a - 1];
            for b in 1..a {
                acc -= self.get(a, b) * x[b - 1];
            }
            let piv = self.get(a, a);
            if piv.norm() == 0.0 {
                return Err(Error::singular("moment matrix has a zero diagonal entry"));
            }
            x[a - 1] = acc / piv;
        }
        Ok(x)
    }
}

pub fn moment_matrix(ens: &EnsembleSpec, d: usize) -> MomentMatrix {
    MomentMatrix::new(ens.factor(), d)
}

/// `int f(E) E^(m-1) exp(-i kappa E) Theta(L E) dE` with `L = -sign(Im kappa)`.
pub fn half_line_moment(factor: &dyn CharFactor, m: usize, kappa: C64) -> Result<C64> {
    let sign = crate::ensembles::imag_sign(kappa);
    if sign == 0 {
        return Err(Error::validation(format!("source {kappa} must lie off the real axis")));
    }
    let spec = QuadratureSpec::half_line(sign);
    let p = (m - 1) as i32;
    let est = integrate_1d(
        |e| factor.value(e) * e.powi(p) * (C64::new(0.0, -e) * kappa).exp(),
        &spec,
    )?;
    Ok(est.value)
}

/// Correction term of the kernel, `-i L sum_mn I_m (M^-1)_mn kappa2^(n-1)`.
fn kernel_correction(factor: &dyn CharFactor, d: usize, kappa1: C64, kappa2: C64) -> Result<C64> {
    if d == 0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let l = crate::ensembles::imag_sign(kappa1) as f64;
    let m = MomentMatrix::new(factor, d);
    let powers: Vec<C64> = (0..d).map(|n| kappa2.powi(n as i32)).collect();
    let x = m.solve(&powers)?;
    let mut acc = C64::new(0.0, 0.0);
    for (j, xj) in x.iter().enumerate() {
        acc += half_line_moment(factor, j + 1, kappa1)? * xj;
    }
    Ok(C64::new(0.0, -l) * acc)
}

/// Kernel `K^(d)(kappa1, kappa2)`.
pub fn kernel_k(ens: &EnsembleSpec, d: usize, kappa1: C64, kappa2: C64) -> Result<C64> {
    if kappa1.im == 0.0 {
        return Err(Error::validation("kernel needs Im kappa1 != 0"));
    }
    if (kappa1 - kappa2).norm() <= TOL_EQUAL {
        return Err(Error::singular("kernel has a pole at kappa1 = kappa2"));
    }
    Ok(C64::new(1.0, 0.0) / (kappa1 - kappa2) + kernel_correction(ens.factor(), d, kappa1, kappa2)?)
}

/// Half-line integral `-i L int f(E) E^(N-1) exp(-i kappa E) Theta(L E) dE`;
/// for `N = 1` this is `<1 / (h - kappa)>`.
pub fn z_one_zero(ens: &EnsembleSpec, n: usize, kappa: C64) -> Result<C64> {
    if n == 0 {
        return Err(Error::validation("Z_{1/0} needs N >= 1"));
    }
    let l = crate::ensembles::imag_sign(kappa) as f64;
    Ok(C64::new(0.0, -l) * half_line_moment(ens.factor(), n, kappa)?)
}

/// Ensemble average `<1 / det(H - kappa)>` at dimension `n`. The half-line
/// integral of `z_one_zero` equals it only after the factor
/// `(-i)^(n-1) / (n-1)!`, which is exact for `n = 1`.
pub fn one_point_function(ens: &EnsembleSpec, n: usize, kappa: C64) -> Result<C64> {
    Ok(z_one_zero(ens, n, kappa)? * i_pow(-(n as i64 - 1)) / factorial(n - 1))
}

/// Two-point function `Z_{1/1}^(N) = (kappa1 - kappa2) K^(N)`, evaluated as
/// `1 + (kappa1 - kappa2) * correction` so coincident sources give exactly 1.
pub fn z_one_one(ens: &EnsembleSpec, n: usize, kappa1: C64, kappa2: C64) -> Result<C64> {
    if kappa1.im == 0.0 {
        return Err(Error::validation("Z_{1/1} needs Im kappa1 != 0"));
    }
    if kappa1 == kappa2 {
        return Ok(C64::new(1.0, 0.0));
    }
    Ok(C64::new(1.0, 0.0) + (kappa1 - kappa2) * kernel_correction(ens.factor(), n, kappa1, kappa2)?)
}

/// Generating function for a factorizing characteristic function as a
/// `k1 x k1` determinant of two-point kernels and one-point functions.
/// `n_tilde` selects the kernel order, any value in `d..=N` with
/// `d = N + k2 - k1`; `None` uses `N`.
pub fn generating_function_det(ens: &EnsembleSpec, kappa: &SourceKappa, n_tilde: Option<usize>) -> Result<C64> {
    let n = ens.n();
    kappa.check_dimensions(n).map_err(|_| {
        Error::validation(format!(
            "the determinantal formula requires k2 <= k1 <= N (got k1 = {}, k2 = {}, N = {n})",
            kappa.k1(),
            kappa.k2()
        ))
    })?;
    kappa.check_off_axis()?;
    let (k1, k2) = (kappa.k1(), kappa.k2());
    let d = n + k2 - k1;
    let n_tilde = n_tilde.unwrap_or(n);
    if n_tilde < d || n_tilde > n {
        return Err(Error::validation(format!("kernel order must lie in {d}..={n}, got {n_tilde}")));
    }
    for a in 0..k1 {
        for b in a + 1..k1 {
            if (kappa.bos[a] - kappa.bos[b]).norm() <= TOL_EQUAL {
                return Err(Error::singular("coincident bosonic sources"));
            }
        }
    }
    for a in 0..k2 {
        for b in a + 1..k2 {
            if (kappa.ferm[a] - kappa.ferm[b]).norm() <= TOL_EQUAL {
                return Err(Error::singular("coincident fermionic sources"));
            }
        }
    }
    let ber = sqrt_berezinian(&kappa.bos, &kappa.ferm, BerezinianForm::Ratio)?.value;
    let mut rows = Vec::with_capacity(k1);
    for a in 0..k1 {
        let mut row = Vec::with_capacity(k1);
        for b in 0..k2 {
            row.push(kernel_k(ens, n_tilde, kappa.bos[a], kappa.ferm[b])?);
        }
        for b in d + 1..=n {
            row.push(one_point_function(ens, b, kappa.bos[a])?);
        }
        rows.push(row);
    }
    let sign = sign_pow((k2 * (k2 + 1) / 2 + k2 * k1) as i64) * one_point_column_sign(k1, k2);
    Ok(det(&rows) * sign / ber)
}

/// Extra sign of the determinant when the one-point columns are taken as the
/// ensemble averages `<1 / det(H - kappa)>` at dimensions `d+1, ..., N` in
/// ascending order: `(-1)^(m(m-1)/2)` with `m = k1 - k2`. It equals reversing
/// the order of those columns and is invisible for `m <= 1`.
pub fn one_point_column_sign(k1: usize, k2: usize) -> f64 {
    let m = k1 - k2;
    sign_pow((m * m.saturating_sub(1) / 2) as i64)
}

/// Closed form of `int_U(N) exp(-i tr E U Et U^dagger) dmu(U)`.
pub fn hciz_closed_form(e: &[f64], et: &[f64]) -> Result<C64> {
    let n = e.len();
    if n == 0 || et.len() != n {
        return Err(Error::validation("HCIZ needs two nonempty eigenvalue lists of equal length"));
    }
    for list in [e, et] {
        for a in 0..n {
            for b in a + 1..n {
                if (list[a] - list[b]).abs() <= TOL_EQUAL {
                    return Err(Error::singular("HCIZ closed form needs pairwise distinct eigenvalues"));
                }
            }
        }
    }
    let rows: Vec<Vec<C64>> = e
        .iter()
        .map(|&x| et.iter().map(|&y| C64::from_polar(1.0, -x * y)).collect())
        .collect();
    let pref: C64 = (1..=n).map(|j| i_pow(j as i64 - 1) * factorial(j - 1)).product();
    let to_c = |v: &[f64]| v.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>();
    Ok(pref * det(&rows) / (vandermonde(&to_c(e)) * vandermonde(&to_c(et))))
}
