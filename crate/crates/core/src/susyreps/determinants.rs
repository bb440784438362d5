use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{boundary_kernel, check_lower_half_plane, half_line_spec, w, GaussianClass};
use crate::distdet::{CoincidenceLimit, DistDet, DistDetEntry, EntryKind, Expansion, Var};
use crate::ensembles::{EnsembleSpec, ExternalField, SourceKappa};
use crate::error::{Error, Result};
use crate::linalg::{factorial, i_pow, sign_pow, vandermonde};
use crate::quadrature::{integrate_1d, integrate_polar, QuadratureSpec};
use crate::superfns::chi;
use crate::TOL_EQUAL;

/// Denominator of the smooth kernel in the `s`-representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoleDenominator {
    /// `(s_b1 - kappa_b1)^{N+1}`, which reproduces the determinantal route.
    #[default]
    Plain,
    /// `(e^{-i psi} s_b1 - kappa_b1)^{N+1}`.
    Rotated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SusyOptions {
    /// Keep the Dirac (Efetov-Wegner) parts of the determinant entries.
    pub include_ew: bool,
    pub pole: PoleDenominator,
}

impl Default for SusyOptions {
    fn default() -> Self {
        SusyOptions {
            include_ew: true,
            pole: PoleDenominator::Plain,
        }
    }
}

fn square_sources(kappa: &SourceKappa) -> Result<usize> {
    if kappa.k1() != kappa.k2() || kappa.k1() == 0 {
        return Err(Error::validation(format!(
            "superspace determinant formulas need k1 = k2 >= 1, got {}/{}",
            kappa.k1(),
            kappa.k2()
        )));
    }
    check_lower_half_plane(kappa)?;
    Ok(kappa.k1())
}

fn pair_vars(k: usize) -> Vec<Var> {
    (0..k).map(Var::Bos).chain((0..k).map(Var::Ferm)).collect()
}

/// Generating function `Z_k^{(N)}` of the Gaussian ensemble from the
/// `s`-representation: a `k x k` determinant of Dirac terms weighted by
/// `(kappa_a2 / kappa_b1)^N` and smooth double integrals.
pub fn generating_function_susy(ens: &EnsembleSpec, kappa: &SourceKappa, opts: &SusyOptions) -> Result<C64> {
    Ok(generating_function_susy_expansion(ens, kappa, opts)?.value)
}

/// Same as `generating_function_susy`, keeping the contributions grouped by
/// the number of Dirac factors.
pub fn generating_function_susy_expansion(
    ens: &EnsembleSpec,
    kappa: &SourceKappa,
    opts: &SusyOptions,
) -> Result<Expansion> {
    let k = square_sources(kappa)?;
    let g = GaussianClass::of(ens)?;
    if !ens.is_gaussian() || g.a != C64::new(-0.5, 0.0) || g.b != C64::new(0.0, 0.0) {
        return Err(Error::validation("the s-representation is built in for the unit Gaussian only"));
    }
    let limit = CoincidenceLimit::new(&kappa.bos, &kappa.ferm)?;
    if k > 1 && !limit.pairs.is_empty() {
        return Err(Error::validation(
            "coincident bosonic and fermionic sources are ambiguous in the k >= 2 s-representation",
        ));
    }
    let n = ens.n();
    let wbar = w().inv();
    let spec = QuadratureSpec::full_line().with_rel_tol(1e-10);
    let mut entries = Vec::with_capacity(k * k);
    for a in 0..k {
        for b in 0..k {
            let (kb, ka) = (kappa.bos[b], kappa.ferm[a]);
            let mut e = DistDetEntry::new(vec![Var::Bos(b), Var::Ferm(a)])
                .with(EntryKind::DeltaPair, CoincidenceLimit::pole((ka / kb).powi(n as i32), kb, ka));
            if chi(kb - ka).value == 1 {
                let integrand = |rho: f64, theta: f64| {
                    let (s1, s2) = (rho * theta.cos(), rho * theta.sin());
                    let den = match opts.pole {
                        PoleDenominator::Plain => C64::new(s1, 0.0) - kb,
                        PoleDenominator::Rotated => wbar * s1 - kb,
                    };
                    let gauss = (-0.5 * rho * rho).exp();
                    gauss * n as f64 * (wbar * s2 - ka).powi(n as i32 - 1)
                        / (C64::new(0.0, 2.0 * PI) * den.powi(n as i32 + 1) * (s1 - wbar * s2))
                };
                e = e.with(EntryKind::Smooth, wbar * integrate_polar(integrand, &spec)?.value);
            }
            entries.push(e);
        }
    }
    limit.reduce(&mut entries, k);
    let exp = DistDet::new(k, pair_vars(k), entries)?.expand(opts.include_ew)?;
    let pref = i_pow(k as i64) * i_pow(-((k * k) as i64)) * limit.inv_sqrt_ber;
    Ok(Expansion {
        value: pref * exp.value,
        by_delta_count: exp.by_delta_count.iter().map(|v| pref * v).collect(),
        terms: exp.terms,
    })
}

fn upper_left_entry(g: &GaussianClass, n: usize, kb: C64, ka: C64, b: usize, a: usize) -> Result<DistDetEntry> {
    let mut e = DistDetEntry::new(vec![Var::Bos(b), Var::Ferm(a)])
        .with(EntryKind::DeltaPair, CoincidenceLimit::pole(C64::new(1.0, 0.0), kb, ka));
    if chi(kb - ka).value == 1 {
        e = e.with(EntryKind::Smooth, boundary_kernel(&g.bos(kb), &g.ferm(ka), n)?);
    }
    Ok(e)
}

/// Generating function without external field from the eigenvalue
/// representation of the superspace integral, a `k x k` determinant of
/// Efetov-Wegner terms and half-line kernels.
pub fn generating_function_alpha0(ens: &EnsembleSpec, kappa: &SourceKappa) -> Result<C64> {
    let k = square_sources(kappa)?;
    let g = GaussianClass::of(ens)?;
    let n = ens.n();
    let limit = CoincidenceLimit::new(&kappa.bos, &kappa.ferm)?;
    let mut entries = Vec::with_capacity(k * k);
    for a in 0..k {
        for b in 0..k {
            entries.push(upper_left_entry(&g, n, kappa.bos[b], kappa.ferm[a], b, a)?);
        }
    }
    limit.reduce(&mut entries, k);
    let det = DistDet::new(k, pair_vars(k), entries)?.expand(true)?.value;
    Ok(sign_pow((k * (k - 1) / 2) as i64) * limit.inv_sqrt_ber * det)
}

/// Constant in front of the lower-left block `<B3>`. Monte Carlo fixes it to
/// `+i`; with `-i` the external-field correction comes out with the
/// opposite sign.
pub const B3_CONSTANT: C64 = C64::new(0.0, 1.0);

/// `sum_{n >= N} x^n / n!`. Summed directly for `|x| < 1` and for large
/// positive real `x`, where no terms cancel; otherwise as `e^x` minus the
/// partial sum.
pub fn b3_series_tail(x: C64, n: usize) -> C64 {
    let r = x.norm();
    if r < 1.0 || (r > 30.0 && x.im == 0.0 && x.re > 0.0) {
        let mut term = C64::new(1.0, 0.0);
        for j in 1..=n {
            term *= x / j as f64;
        }
        // compensated summation
        let (mut sum, mut carry) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        let mut j = n;
        loop {
            let y = term - carry;
            let t = sum + y;
            carry = (t - sum) - y;
            sum = t;
            j += 1;
            term *= x / j as f64;
            if term.norm() <= 1e-17 * sum.norm().max(f64::MIN_POSITIVE) && j as f64 > r {
                break;
            }
        }
        sum
    } else {
        let mut partial = C64::new(0.0, 0.0);
        let mut term = C64::new(1.0, 0.0);
        for j in 0..n {
            partial += term;
            term *= x / (j + 1) as f64;
        }
        x.exp() - partial
    }
}

/// Generating function in the presence of the external field `alpha H0`,
/// from the `(k+N) x (k+N)` determinant of integrated blocks. For
/// `alpha = 0` the Vandermonde block degenerates and the `k x k` form is used.
pub fn generating_function_external(ens: &EnsembleSpec, kappa: &SourceKappa, field: &ExternalField) -> Result<C64> {
    let k = square_sources(kappa)?;
    let n = ens.n();
    field.check(n)?;
    if field.alpha == 0.0 {
        return generating_function_alpha0(ens, kappa);
    }
    let g = GaussianClass::of(ens)?;
    let dim = k + n;
    if factorial(dim) > crate::distdet::TERM_BUDGET as f64 {
        return Err(Error::Resource(format!(
            "determinant of size k + N = {dim} exceeds the expansion budget"
        )));
    }
    let w = w();
    let wbar = w.inv();
    let limit = CoincidenceLimit::new(&kappa.bos, &kappa.ferm)?;
    let ae: Vec<f64> = field.e0.iter().map(|e| field.alpha * e).collect();
    let mut entries = Vec::with_capacity(dim * dim);
    for a in 0..k {
        let ka = kappa.ferm[a];
        for b in 0..k {
            entries.push(upper_left_entry(&g, n, kappa.bos[b], ka, b, a)?);
        }
        let chis: f64 = kappa.bos.iter().map(|&kj| chi(kj - ka).as_f64()).product();
        let hd = g.ferm(ka).derivatives_at_zero(n - 1);
        for (b, d) in hd.iter().enumerate() {
            let v = (C64::i() * wbar).powi(b as i32) * d * chis;
            entries.push(DistDetEntry::new(vec![Var::Ferm(a)]).with(EntryKind::DeltaDerivativeRow, v));
        }
    }
    for &x in &ae {
        for b in 0..k {
            let kb = kappa.bos[b];
            let chis: f64 = kappa.ferm.iter().map(|&kj| chi(kb - w * kj).as_f64()).product();
            let f1 = g.bos(kb);
            let v = integrate_1d(|r| f1.eval(r) * b3_series_tail(C64::new(0.0, x * r), n), &half_line_spec())?.value;
            entries.push(DistDetEntry::new(vec![Var::Bos(b)]).with(EntryKind::SeriesColumn, B3_CONSTANT * v * chis));
        }
        for b in 0..n {
            entries.push(DistDetEntry::new(vec![]).with(EntryKind::Constant, C64::new((-x).powi(b as i32), 0.0)));
        }
    }
    limit.reduce(&mut entries, dim);
    let vdm = vandermonde(&ae.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>());
    if vdm.norm() <= TOL_EQUAL {
        return Err(Error::singular("the scaled external field has coincident eigenvalues"));
    }
    let det = DistDet::new(dim, pair_vars(k), entries)?.expand(true)?.value;
    Ok(sign_pow((k * (k - 1) / 2) as i64) * limit.inv_sqrt_ber / vdm * det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detkernels::generating_function_det;
    use crate::susyreps::{z11_superspace, Z11Form};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn series_tail_identity() {
        for &x in &[c(0.3, 0.1), c(0.0, 5.0), c(-4.0, 2.0), c(0.0, 19.5), c(12.0, 0.0)] {
            for n in [1usize, 2, 4] {
                let partial: C64 = (0..n).map(|j| x.powi(j as i32) / factorial(j)).sum();
                let expected = x.exp() - partial;
                let tail = b3_series_tail(x, n);
                assert!((tail - expected).norm() <= 1e-14 * expected.norm().max(1.0), "{x} {n}: {tail} vs {expected}");
            }
        }
        // the direct branch agrees with the subtraction where both are accurate
        let x = c(35.0, 0.0);
        let partial: C64 = (0..3).map(|j| x.powi(j as i32) / factorial(j)).sum();
        let expected = x.exp() - partial;
        assert!((b3_series_tail(x, 3) - expected).norm() < 1e-14 * expected.norm());
    }

    #[test]
    fn one_by_one_routes_agree() {
        let ens = EnsembleSpec::gue(2).unwrap();
        let kappa = SourceKappa::new(vec![c(0.3, -0.5)], vec![c(-0.2, 0.0)]);
        let susy = generating_function_susy(&ens, &kappa, &SusyOptions::default()).unwrap();
        let det = generating_function_det(&ens, &kappa, None).unwrap();
        let a0 = generating_function_alpha0(&ens, &kappa).unwrap();
        let ss = z11_superspace(&ens, 2, kappa.bos[0], kappa.ferm[0], Z11Form::EfetovWegner).unwrap();
        assert!((susy - det).norm() < 1e-6 * det.norm(), "{susy} vs {det}");
        assert!((a0 - ss).norm() < 1e-12 * ss.norm());
        let coincident = SourceKappa::new(vec![c(0.3, -0.5)], vec![c(0.3, -0.5)]);
        assert!((generating_function_susy(&ens, &coincident, &SusyOptions::default()).unwrap() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn two_by_two_routes_agree() {
        let ens = EnsembleSpec::gue(3).unwrap();
        let kappa = SourceKappa::new(vec![c(0.4, -0.5), c(-0.6, -0.3)], vec![c(0.1, 0.0), c(-1.0, 0.2)]);
        let det = generating_function_det(&ens, &kappa, None).unwrap();
        let susy = generating_function_susy(&ens, &kappa, &SusyOptions::default()).unwrap();
        let a0 = generating_function_alpha0(&ens, &kappa).unwrap();
        assert!((susy - det).norm() < 1e-5 * det.norm(), "{susy} vs {det}");
        assert!((a0 - det).norm() < 1e-6 * det.norm(), "{a0} vs {det}");
    }

    #[test]
    fn external_field_coincidence_and_alpha0() {
        let ens = EnsembleSpec::gue(2).unwrap();
        let k = c(0.3, -0.5);
        let coincident = SourceKappa::new(vec![k], vec![k]);
        let field = ExternalField::new(0.5, vec![1.0, -1.0]);
        let z = generating_function_external(&ens, &coincident, &field).unwrap();
        assert!((z - 1.0).norm() < 1e-6, "{z}");
        let kappa = SourceKappa::new(vec![k], vec![c(-0.2, 0.0)]);
        let z0 = generating_function_external(&ens, &kappa, &ExternalField::new(0.0, vec![1.0, -1.0])).unwrap();
        let susy = generating_function_susy(&ens, &kappa, &SusyOptions::default()).unwrap();
        assert!((z0 - susy).norm() < 1e-5 * susy.norm());
    }

    #[test]
    fn external_field_matches_monte_carlo() {
        use crate::ensembles::mc_external_field;
        let ens = EnsembleSpec::gue(2).unwrap();
        let kappa = SourceKappa::new(vec![c(0.3, -0.5)], vec![c(-0.2, 0.0)]);
        let field = ExternalField::new(0.5, vec![1.0, -1.0]);
        let z = generating_function_external(&ens, &kappa, &field).unwrap();
        let mc = mc_external_field(&ens, &kappa, &field, 200_000, 11).unwrap();
        assert!(mc.sigma_distance(z) < 4.0, "{z} vs {:?}", mc);
        // the field must actually move the value, or the check above is vacuous
        let z0 = generating_function_alpha0(&ens, &kappa).unwrap();
        assert!((z - z0).norm() > 10.0 * mc.stderr);
    }
}
