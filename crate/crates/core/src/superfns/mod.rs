//! Supermatrix Bessel functions with and without Efetov-Wegner terms, the
//! indicator `chi`, the differential operator that replaces the Grassmann
//! integration, and numerical checks of the identities linking them.

mod superfn;

pub use superfn::{ProductTerm, SuperFn};

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::detkernels::{sqrt_berezinian, BerezinianForm};
use crate::distdet::{CoincidenceLimit, DistDet, DistDetEntry, EntryKind, Var};
use crate::ensembles::SourceKappa;
use crate::error::{Error, Result};
use crate::grassmann::{GrassmannElement, GrassmannMatrix, SuperMeasure};
use crate::linalg::{binomial, det, factorial, i_pow, permutations, sign_pow, vandermonde};
use crate::quadrature::{
    fd_derivative, fd_partial, integrate_1d, integrate_2d, integrate_polar, QuadratureSpec, DEFAULT_FD_STEP,
};
use crate::TOL_EQUAL;

/// Default Wick angle. At `pi/2` the Gaussian fermionic weight
/// `exp(e^{2 i psi} r^2 / 2)` becomes `exp(-r^2 / 2)`.
pub const DEFAULT_PSI: f64 = PI / 2.0;

/// Constant `c` in `int exp(-Str s^2/2 + i Str s kappa) d[s] = c * (1 - ...)`
/// for `1/1` supermatrices under the measure conventions of `SuperMeasure`.
pub const GAUSSIAN_U11_CONSTANT: C64 = C64::new(0.0, -1.0);

/// `e^{i psi}`, exactly `i` at the default angle.
pub fn wick_phase(psi: f64) -> C64 {
    if psi == DEFAULT_PSI {
        C64::new(0.0, 1.0)
    } else {
        C64::from_polar(1.0, psi)
    }
}

fn check_psi(psi: f64) -> Result<()> {
    if !(psi > 0.0 && psi < PI) {
        return Err(Error::validation(format!("Wick angle must lie in ]0, pi[, got {psi}")));
    }
    Ok(())
}

/// Eigenvalues of a Wick-rotated Hermitian supermatrix: bosonic `r1` and
/// radial fermionic `r2`, whose physical eigenvalues are `e^{i psi} r2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperEigenPoint {
    r1: Vec<f64>,
    r2: Vec<f64>,
    psi: f64,
}

impl SuperEigenPoint {
    pub fn new(r1: Vec<f64>, r2: Vec<f64>, psi: f64) -> Result<Self> {
        check_psi(psi)?;
        if r1.iter().chain(&r2).any(|x| !x.is_finite()) {
            return Err(Error::validation("eigenvalues must be finite"));
        }
        Ok(SuperEigenPoint { r1, r2, psi })
    }

    pub fn k1(&self) -> usize {
        self.r1.len()
    }

    pub fn k2(&self) -> usize {
        self.r2.len()
    }

    pub fn r1(&self) -> &[f64] {
        &self.r1
    }

    pub fn r2(&self) -> &[f64] {
        &self.r2
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    pub fn wick(&self) -> C64 {
        wick_phase(self.psi)
    }

    fn bos(&self) -> Vec<C64> {
        self.r1.iter().map(|&x| C64::new(x, 0.0)).collect()
    }

    fn ferm(&self) -> Vec<C64> {
        let w = self.wick();
        self.r2.iter().map(|&y| w * y).collect()
    }

    fn flat(&self) -> Vec<f64> {
        self.r1.iter().chain(&self.r2).copied().collect()
    }
}

/// Indicator that vanishes exactly on a zero argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiValue {
    pub arg: C64,
    pub value: u8,
}

impl ChiValue {
    pub fn as_f64(&self) -> f64 {
        self.value as f64
    }
}

pub fn chi(x: C64) -> ChiValue {
    ChiValue {
        arg: x,
        value: u8::from(x.norm() > TOL_EQUAL),
    }
}

/// `(-1)^{(k1+k2)(k1+k2-1)/2} (i pi)^{((k2-k1)^2 - k1 - k2)/2} / (2^{k1 k2} k1! k2!)`.
fn bessel_prefactor(k1: usize, k2: usize) -> C64 {
    let k = k1 + k2;
    let e = ((k1 as i64 - k2 as i64).pow(2) - k as i64) / 2;
    let sign = sign_pow((k * k.saturating_sub(1) / 2) as i64);
    i_pow(e) * PI.powi(e as i32) * sign / (2f64.powi((k1 * k2) as i32) * factorial(k1) * factorial(k2))
}

/// Which printed expression of the Bessel function to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlaneWaveForm {
    /// Sum over both permutation groups of a Cauchy-type determinant.
    PermutationSum,
    /// Product of two plane-wave determinants over square-root Berezinians.
    Factorized,
}

fn check_shapes(r: &SuperEigenPoint, kappa: &SourceKappa) -> Result<()> {
    if r.k1() != kappa.k1() || r.k2() != kappa.k2() {
        return Err(Error::validation(format!(
            "eigenvalues are {}/{} but sources are {}/{}",
            r.k1(),
            r.k2(),
            kappa.k1(),
            kappa.k2()
        )));
    }
    if r.k2() > r.k1() {
        return Err(Error::validation("need k2 <= k1"));
    }
    Ok(())
}

fn nonzero(x: C64, what: &str) -> Result<C64> {
    if x.norm() <= TOL_EQUAL {
        return Err(Error::singular(format!("{what} vanishes")));
    }
    Ok(x)
}

/// Supermatrix Bessel function `phi(-i r, kappa)` without Efetov-Wegner terms.
pub fn phi_plane_wave(r: &SuperEigenPoint, kappa: &SourceKappa, form: PlaneWaveForm) -> Result<C64> {
    check_shapes(r, kappa)?;
    let (k1, k2) = (r.k1(), r.k2());
    let w = r.wick();
    let ber_kappa = nonzero(
        sqrt_berezinian(&kappa.bos, &kappa.ferm, BerezinianForm::Ratio)?.value,
        "square-root Berezinian of kappa",
    )?;
    let sqrt_ber_r = nonzero(
        sqrt_berezinian(&r.bos(), &r.ferm(), BerezinianForm::Ratio)?.value,
        "square-root Berezinian of r",
    )?;
    let (x, y) = (r.r1(), r.r2());
    let chi_ab = |a: usize, b: usize| chi(kappa.bos[b] - kappa.ferm[a]).as_f64();
    match form {
        PlaneWaveForm::PermutationSum => {
            let mut sum = C64::new(0.0, 0.0);
            for (o1, _) in permutations(k1) {
                for (o2, _) in permutations(k2) {
                    let mut rows = Vec::with_capacity(k1);
                    for a in 0..k2 {
                        rows.push(
                            (0..k1)
                                .map(|b| {
                                    let (xb, ya) = (x[o1[b]], y[o2[a]]);
                                    let phase = C64::new(0.0, -xb) * kappa.bos[b] + C64::i() * w * kappa.ferm[a] * ya;
                                    phase.exp() / (xb - w * ya) * chi_ab(a, b)
                                })
                                .collect(),
                        );
                    }
                    for a in 0..k1 - k2 {
                        rows.push(
                            (0..k1)
                                .map(|b| {
                                    let xb = x[o1[b]];
                                    (C64::new(0.0, -xb) * kappa.bos[b]).exp() * xb.powi(a as i32)
                                })
                                .collect(),
                        );
                    }
                    sum += det(&rows);
                }
            }
            Ok(bessel_prefactor(k1, k2) * sum / (ber_kappa * sqrt_ber_r * sqrt_ber_r))
        }
        PlaneWaveForm::Factorized => {
            let mut chis = 1.0;
            for a in 0..k2 {
                for b in 0..k1 {
                    chis *= chi_ab(a, b);
                }
            }
            let d1: Vec<Vec<C64>> = (0..k1)
                .map(|a| (0..k1).map(|b| (C64::new(0.0, -x[b]) * kappa.bos[a]).exp()).collect())
                .collect();
            let d2: Vec<Vec<C64>> = (0..k2)
                .map(|a| (0..k2).map(|b| (C64::i() * w * kappa.ferm[a] * y[b]).exp()).collect())
                .collect();
            let k = k1 + k2;
            let resign = sign_pow((k * k.saturating_sub(1) / 2 + k2 * k2.saturating_sub(1) / 2 + k1 * k2) as i64);
            Ok(bessel_prefactor(k1, k2) * resign * chis * det(&d1) * det(&d2) / (ber_kappa * sqrt_ber_r))
        }
    }
}

/// Quadrature settings for the Bessel-function actions.
fn default_spec() -> QuadratureSpec {
    QuadratureSpec::full_line().with_rel_tol(1e-10)
}

/// `int Ber(r) phi_hat(-i r, kappa) F(r) d[r]`, the supermatrix Bessel function
/// with Efetov-Wegner terms acting on `F`. The measure is
/// `d[r] = prod dr_a1 prod e^{i psi} dr_b2`; Dirac factors are evaluated at
/// the origin and the smooth entries by quadrature.
pub fn phi_hat_action(f: &SuperFn, kappa: &SourceKappa) -> Result<C64> {
    phi_hat_action_with(f, kappa, &default_spec())
}

pub fn phi_hat_action_with(f: &SuperFn, kappa: &SourceKappa, spec: &QuadratureSpec) -> Result<C64> {
    let (k1, k2) = (kappa.k1(), kappa.k2());
    if k2 > k1 {
        return Err(Error::validation("the Bessel-function action needs k1 >= k2"));
    }
    if k1 + k2 > 6 {
        return Err(Error::Resource(format!("k1 + k2 = {} exceeds 6", k1 + k2)));
    }
    let w = wick_phase(f.psi());
    let limit = CoincidenceLimit::new(&kappa.bos, &kappa.ferm)?;
    let vars: Vec<Var> = (0..k1).map(Var::Bos).chain((0..k2).map(Var::Ferm)).collect();
    let mut total = C64::new(0.0, 0.0);
    for term in f.terms() {
        let f0 = term.bos.eval(0.0) * term.ferm.eval(0.0);
        let mut entries = Vec::with_capacity(k1 * k1);
        for a in 0..k2 {
            for b in 0..k1 {
                let (kb, ka) = (kappa.bos[b], kappa.ferm[a]);
                let mut e = DistDetEntry::new(vec![Var::Bos(b), Var::Ferm(a)])
                    .with(EntryKind::DeltaPair, CoincidenceLimit::pole(-2.0 * PI * f0, kb, ka));
                if chi(kb - ka).value == 1 {
                    let g = |rho: f64, theta: f64| {
                        let (x, y) = (rho * theta.cos(), rho * theta.sin());
                        let phase = C64::new(0.0, -x) * kb + C64::i() * w * ka * y;
                        phase.exp() * term.bos.eval(x) * term.ferm.eval(y) / (x - w * y)
                    };
                    let v = integrate_polar(g, spec)?.value;
                    e = e.with(EntryKind::Smooth, w * v);
                }
                entries.push(e);
            }
        }
        for a in 0..k1 - k2 {
            for b in 0..k1 {
                let kb = kappa.bos[b];
                let v = integrate_1d(
                    |x| (C64::new(0.0, -x) * kb).exp() * x.powi(a as i32) * term.bos.eval(x),
                    spec,
                )?
                .value;
                entries.push(DistDetEntry::new(vec![Var::Bos(b)]).with(EntryKind::Smooth, v));
            }
        }
        limit.reduce(&mut entries, k1);
        let expansion = DistDet::new(k1, vars.clone(), entries)?.expand(true)?;
        total += term.coeff * expansion.value;
    }
    Ok(bessel_prefactor(k1, k2) * factorial(k1) * factorial(k2) * total * limit.inv_sqrt_ber)
}

/// The `1/1` supermatrix `[[x, w^{1/2} eta*], [w^{1/2} eta, w y]]` over the
/// generator pair `(eta, eta*)`, `w = e^{i psi}`.
pub fn u11_supermatrix(x: C64, y: C64, psi: f64) -> GrassmannMatrix {
    let w = wick_phase(psi);
    let half = C64::from_polar(1.0, psi / 2.0);
    let entries = vec![
        GrassmannElement::scalar(2, x),
        GrassmannElement::generator(2, 1).scale(half),
        GrassmannElement::generator(2, 0).scale(half),
        GrassmannElement::scalar(2, w * y),
    ];
    GrassmannMatrix::new(1, 1, entries).expect("grading is correct by construction")
}

/// `int g(rho) d[rho]` over Wick-rotated `1/1` supermatrices: Berezin
/// integration by the engine, then tensor quadrature over both real blocks.
/// The measure carries `e^{i psi}` for the fermion-fermion block.
pub fn u11_superintegral<G>(g: G, psi: f64, spec: &QuadratureSpec) -> Result<C64>
where
    G: Fn(&GrassmannMatrix) -> Result<GrassmannElement>,
{
    let measure = SuperMeasure::new(1, 1, psi);
    let w = wick_phase(psi);
    let failure = std::cell::RefCell::new(None::<Error>);
    let point = |x: f64, y: f64| -> C64 {
        let rho = u11_supermatrix(C64::new(x, 0.0), C64::new(y, 0.0), psi);
        match g(&rho).and_then(|e| measure.integrate(&e)) {
            Ok(v) => v * w,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                C64::new(0.0, 0.0)
            }
        }
    };
    let est = integrate_2d(point, spec, spec)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(est.value)
}

/// `exp(i s Str(rho kappa))` for diagonal `kappa = diag(k1, k2)`.
fn source_exponential(rho: &GrassmannMatrix, k1: C64, k2: C64, s: C64) -> Result<GrassmannElement> {
    let k = GrassmannMatrix::numeric(1, 1, rho.n_gen(), &[k1, C64::new(0.0, 0.0), C64::new(0.0, 0.0), k2])?;
    Ok(rho.mul(&k)?.str().scale(C64::i() * s).gexp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct U11Report {
    pub lhs: C64,
    pub rhs: C64,
    /// `lhs / rhs`, the empirical proportionality constant.
    pub constant: C64,
    /// `|lhs / GAUSSIAN_U11_CONSTANT - rhs|`.
    pub diff: f64,
}

/// Gaussian `1/1` superintegral against its eigenvalue representation: the
/// left side by the Grassmann engine, the right side
/// `1 - (k1 - k2)/(2 pi i) int exp(-(s1^2+s2^2)/2 + i s1 k1 + s2 k2)/(s1 - i s2) ds`.
pub fn check_gaussian_u11(kappa1: C64, kappa2: C64) -> Result<U11Report> {
    let spec = QuadratureSpec::full_line().with_rel_tol(1e-11);
    let lhs = u11_superintegral(
        |rho| {
            let gauss = rho.mul(rho)?.str().scale(C64::new(-0.5, 0.0));
            Ok(&gauss.gexp() * &source_exponential(rho, kappa1, kappa2, C64::new(1.0, 0.0))?)
        },
        DEFAULT_PSI,
        &spec,
    )?;
    let rhs = if kappa1 == kappa2 {
        C64::new(1.0, 0.0)
    } else {
        let g = |rho: f64, theta: f64| {
            let (s1, s2) = (rho * theta.cos(), rho * theta.sin());
            let e = C64::new(-0.5 * rho * rho, 0.0) + C64::i() * s1 * kappa1 + kappa2 * s2;
            e.exp() / C64::new(s1, -s2)
        };
        let v = integrate_polar(g, &spec)?.value;
        C64::new(1.0, 0.0) - (kappa1 - kappa2) / C64::new(0.0, 2.0 * PI) * v
    };
    Ok(U11Report {
        lhs,
        rhs,
        constant: lhs / rhs,
        diff: (lhs / GAUSSIAN_U11_CONSTANT - rhs).norm(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DOperatorForm {
    /// Product of first-order operators `d/dr_a1 + e^{-i psi} d/dr_b2`.
    Compact,
    /// Binomial sum of powers of the supertrace Laplacian.
    Sum,
}

/// Multi-index differential operator: orders per variable and a coefficient.
type Operator = Vec<(Vec<usize>, C64)>;

fn op_compose(x: &Operator, y: &Operator) -> Operator {
    let mut out: Operator = Vec::new();
    for (ix, cx) in x {
        for (iy, cy) in y {
            let idx: Vec<usize> = ix.iter().zip(iy).map(|(a, b)| a + b).collect();
            match out.iter_mut().find(|(i, _)| *i == idx) {
                Some((_, c)) => *c += cx * cy,
                None => out.push((idx, cx * cy)),
            }
        }
    }
    out
}

fn op_identity(n: usize) -> Operator {
    vec![(vec![0; n], C64::new(1.0, 0.0))]
}

fn op_power(x: &Operator, p: usize, n: usize) -> Operator {
    (0..p).fold(op_identity(n), |acc, _| op_compose(&acc, x))
}

/// `Str d^2/dr^2 = sum_a d^2/dr_a1^2 - e^{-2 i psi} sum_b d^2/dr_b2^2`.
fn supertrace_laplacian(k1: usize, k2: usize, w: C64) -> Operator {
    let n = k1 + k2;
    (0..n)
        .map(|j| {
            let mut idx = vec![0; n];
            idx[j] = 2;
            let c = if j < k1 { C64::new(1.0, 0.0) } else { -(w.inv() * w.inv()) };
            (idx, c)
        })
        .collect()
}

fn apply<G: Fn(&[f64]) -> C64>(op: &Operator, g: &G, x: &[f64], h: f64) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for (idx, c) in op {
        acc += c * fd_partial(g, x, idx, h)?;
    }
    Ok(acc)
}

/// The square-root Berezinian has a pole at `r_a1 = e^{i psi} r_b2`; the
/// nested stencils reach about `8 h` from the point, so the step is kept this
/// many times smaller than the distance to the nearest pole.
const POLE_STEPS: f64 = 64.0;

/// Apply the differential operator that replaces the Grassmann integration of
/// a rotation-invariant superfunction at the diagonal point `r`. The
/// Vandermonde denominators are `Delta(r1) Delta(e^{i psi} r2)`.
pub fn d_operator_apply(f: &SuperFn, r: &SuperEigenPoint, form: DOperatorForm) -> Result<C64> {
    if f.psi() != r.psi() {
        return Err(Error::validation("superfunction and point use different Wick angles"));
    }
    let (k1, k2) = (r.k1(), r.k2());
    let m = k1 * k2;
    if m > 2 {
        return Err(Error::Resource(format!("k1 k2 = {m} exceeds the supported operator order 2")));
    }
    let n = k1 + k2;
    let w = r.wick();
    let vdm = nonzero(vandermonde(&r.bos()) * vandermonde(&r.ferm()), "Vandermonde denominator")?;
    sqrt_berezinian(&r.bos(), &r.ferm(), BerezinianForm::Ratio)?;
    let g = |v: &[f64]| -> C64 {
        let bos: Vec<C64> = v[..k1].iter().map(|&x| C64::new(x, 0.0)).collect();
        let ferm: Vec<C64> = v[k1..].iter().map(|&y| w * y).collect();
        let sb = sqrt_berezinian(&bos, &ferm, BerezinianForm::Ratio)
            .map(|b| b.value)
            .unwrap_or(C64::new(f64::NAN, 0.0));
        sb * f.eval(&v[..k1], &v[k1..])
    };
    let x = r.flat();
    let pole = (0..k1)
        .flat_map(|a| (0..k2).map(move |b| (a, b)))
        .map(|(a, b)| (C64::new(x[a], 0.0) - w * x[k1 + b]).norm())
        .fold(f64::INFINITY, f64::min);
    let h = DEFAULT_FD_STEP.min(pole / POLE_STEPS);
    let value = match form {
        DOperatorForm::Compact => {
            let mut op = op_identity(n);
            for a in 0..k1 {
                for b in 0..k2 {
                    let mut da = vec![0; n];
                    da[a] = 1;
                    let mut db = vec![0; n];
                    db[k1 + b] = 1;
                    op = op_compose(&op, &vec![(da, C64::new(1.0, 0.0)), (db, w.inv())]);
                }
            }
            apply(&op, &g, &x, h)? / (2.0 * PI).powi(m as i32)
        }
        DOperatorForm::Sum => {
            let lap = supertrace_laplacian(k1, k2, w);
            let neg_lap: Operator = lap.iter().map(|(i, c)| (i.clone(), -c)).collect();
            let cross = |v: &[f64]| -> C64 {
                let mut p = C64::new(1.0, 0.0);
                for a in 0..k1 {
                    for b in 0..k2 {
                        p *= v[a] - w * v[k1 + b];
                    }
                }
                p
            };
            let failure = std::cell::RefCell::new(None::<Error>);
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..=m {
                let inner_op = op_power(&neg_lap, j, n);
                let outer_op = op_power(&lap, m - j, n);
                let inner = |v: &[f64]| -> C64 {
                    match apply(&inner_op, &g, v, h) {
                        Ok(val) => cross(v) * val,
                        Err(e) => {
                            failure.borrow_mut().get_or_insert(e);
                            C64::new(0.0, 0.0)
                        }
                    }
                };
                acc += binomial(m, j) * apply(&outer_op, &inner, &x, h)?;
            }
            if let Some(e) = failure.into_inner() {
                return Err(e);
            }
            acc / (factorial(m) * (4.0 * PI).powi(m as i32))
        }
    };
    Ok(value / vdm)
}

/// `int F(rho) d[eta]` at a diagonal `1/1` point by the Grassmann engine.
pub fn d_operator_grassmann(f: &SuperFn, r: &SuperEigenPoint) -> Result<C64> {
    if r.k1() != 1 || r.k2() != 1 {
        return Err(Error::validation("the Grassmann evaluation is implemented for 1/1"));
    }
    let rho = u11_supermatrix(C64::new(r.r1()[0], 0.0), C64::new(r.r2()[0], 0.0), r.psi());
    SuperMeasure::new(1, 1, r.psi()).integrate(&f.on_u11(&rho)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceResidual {
    /// `(sum_a d^2/dk_a1^2 - sum_b d^2/dk_b2^2) sqrt(Ber)`.
    pub residual: C64,
    /// Largest magnitude among the individual second derivatives.
    pub scale: f64,
}

/// Supertrace Laplacian of the square-root Berezinian of an `l/l` diagonal
/// supermatrix, by Richardson finite differences along the real direction.
pub fn laplace_sqrtber(bos: &[C64], ferm: &[C64], h: f64) -> Result<LaplaceResidual> {
    if bos.len() != ferm.len() {
        return Err(Error::validation("the supertrace Laplacian check needs an l/l supermatrix"));
    }
    sqrt_berezinian(bos, ferm, BerezinianForm::Ratio)?;
    let l = bos.len();
    let mut residual = C64::new(0.0, 0.0);
    let mut scale = 0.0f64;
    for j in 0..2 * l {
        let g = |t: f64| {
            let (mut b, mut f) = (bos.to_vec(), ferm.to_vec());
            if j < l {
                b[j] += t;
            } else {
                f[j - l] += t;
            }
            sqrt_berezinian(&b, &f, BerezinianForm::Ratio)
                .map(|v| v.value)
                .unwrap_or(C64::new(f64::NAN, 0.0))
        };
        let d2 = fd_derivative(g, 0.0, 2, h)?.value;
        scale = scale.max(d2.norm());
        residual += if j < l { d2 } else { -d2 };
    }
    Ok(LaplaceResidual { residual, scale })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommutatorReport {
    /// Commutator from differentiating the exponential term by term.
    pub lhs: C64,
    /// `-i (kb1 - ka2) exp(...) chi(kb1 - ka2)`.
    pub rhs: C64,
    pub deviation: f64,
    /// Deviation of a finite-difference evaluation on a Gaussian test function.
    pub fd_deviation: f64,
}

/// Commutator of `d/dr1 + e^{-i psi} d/dr2` with the plane wave
/// `exp(-i kb1 r1 + i e^{i psi} ka2 r2)`.
pub fn commutator_identity_check(kb1: C64, ka2: C64, r: [f64; 2], psi: f64) -> Result<CommutatorReport> {
    check_psi(psi)?;
    let w = wick_phase(psi);
    let wbar = C64::from_polar(1.0, -psi);
    let plane = |x: f64, y: f64| (C64::new(0.0, -x) * kb1 + C64::i() * w * ka2 * y).exp();
    let e = plane(r[0], r[1]);
    // d/dr1 e = -i kb1 e, d/dr2 e = i w ka2 e
    let lhs = (C64::new(0.0, -1.0) * kb1 + wbar * C64::i() * w * ka2) * e;
    let rhs = C64::new(0.0, -1.0) * (kb1 - ka2) * e * chi(kb1 - ka2).as_f64();

    let test = |x: f64, y: f64| C64::new((-(x * x + y * y) / 2.0).exp(), 0.0);
    let x_op = |g: &dyn Fn(f64, f64) -> C64| -> Result<C64> {
        let d1 = fd_derivative(|t| g(t, r[1]), r[0], 1, DEFAULT_FD_STEP)?.value;
        let d2 = fd_derivative(|t| g(r[0], t), r[1], 1, DEFAULT_FD_STEP)?.value;
        Ok(d1 + wbar * d2)
    };
    let fd = x_op(&|x, y| plane(x, y) * test(x, y))? - e * x_op(&test)?;
    Ok(CommutatorReport {
        lhs,
        rhs,
        deviation: (lhs - rhs).norm(),
        fd_deviation: (fd - lhs * test(r[0], r[1])).norm(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchyReport {
    /// `int F(rho) exp(-i Str kappa rho) d[rho]` at `kappa_11 = kappa_12`.
    pub value: C64,
    pub f_at_origin: C64,
    /// `value / F(0)`.
    pub ratio: C64,
    /// `(-1)^{k1} 2^{2-k1-k2} i` at `k1 = k2 = 1`.
    pub expected: C64,
    /// Change of `value` when the quadrature tolerance is tightened.
    pub refinement_change: f64,
}

/// Reduction of a `1/1` superintegral with coincident sources to the value of
/// the integrand at the origin.
pub fn cauchy_reduction_check(f: &SuperFn, kappa: f64) -> Result<CauchyReport> {
    let k = C64::new(kappa, 0.0);
    let run = |tol: f64| {
        u11_superintegral(
            |rho| Ok(&f.on_u11(rho)? * &source_exponential(rho, k, k, C64::new(-1.0, 0.0))?),
            f.psi(),
            &QuadratureSpec::full_line().with_rel_tol(tol),
        )
    };
    let value = run(1e-10)?;
    let refined = run(1e-12)?;
    let f0 = f.at_origin(1, 1);
    Ok(CauchyReport {
        value,
        f_at_origin: f0,
        ratio: value / f0,
        expected: C64::new(0.0, -1.0),
        refinement_change: (refined - value).norm(),
    })
}
