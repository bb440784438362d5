//! Fixed-seed invariant batteries behind `verify`.

use std::fmt;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{string_enum, Check, Params, Report, Results, VERIFY_PREFIX};
use crate::detkernels::{moment_matrix, sqrt_berezinian, BerezinianForm};
use crate::ensembles::{mc_external_field, EnsembleSpec, ExternalField, SourceKappa};
use crate::error::{Error, Result};
use crate::linalg::{factorial, i_pow};
use crate::superfns::{
    check_gaussian_u11, d_operator_apply, d_operator_grassmann, laplace_sqrtber, phi_hat_action, DOperatorForm,
    SuperEigenPoint, SuperFn, DEFAULT_PSI, GAUSSIAN_U11_CONSTANT,
};
use crate::susyreps::{
    efetov_wegner_z2, generating_function_alpha0, generating_function_external, generating_function_susy,
    ingham_siegel_action, ingham_siegel_action_fd, z11_hubbard_stratonovich_grassmann, z11_superspace,
    SusyOptions, Z11Form,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Berezinian,
    Grassmann,
    Bessel,
    EfetovWegner,
    InghamSiegel,
    ExternalField,
    All,
}

string_enum!(Suite {
    Berezinian => "berezinian",
    Grassmann => "grassmann",
    Bessel => "bessel",
    EfetovWegner => "efetov_wegner",
    InghamSiegel => "ingham_siegel",
    ExternalField => "external_field",
    All => "all",
});

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Multiplies every tolerance. Values below zero make every check fail,
    /// which exercises the failure path.
    pub tolerance_scale: f64,
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tolerance_scale: 1.0,
            mc_samples: 200_000,
            seed: 20240611,
        }
    }
}

/// Collects checks with the suite name as prefix and the scaled tolerance.
struct Battery<'a> {
    prefix: &'static str,
    opts: &'a VerifyOptions,
    checks: Vec<Check>,
}

impl<'a> Battery<'a> {
    fn new(prefix: &'static str, opts: &'a VerifyOptions) -> Self {
        Battery {
            prefix,
            opts,
            checks: Vec::new(),
        }
    }

    fn push(&mut self, name: impl fmt::Display, value: f64, tolerance: f64) {
        self.checks.push(Check::new(
            format!("{}/{name}", self.prefix),
            value,
            tolerance * self.opts.tolerance_scale,
        ));
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed);
        rng.set_stream(stream);
        rng
    }
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `m` complex points in `[-2, 2] x [-1, 1]` with pairwise distance at least `sep`.
fn separated_points(rng: &mut ChaCha8Rng, m: usize, sep: f64) -> Vec<C64> {
    loop {
        let pts: Vec<C64> = (0..m).map(|_| c(rng.random_range(-2.0..2.0), rng.random_range(-1.0..1.0))).collect();
        let ok = (0..m).all(|a| (a + 1..m).all(|b| (pts[a] - pts[b]).norm() >= sep));
        if ok {
            return pts;
        }
    }
}

fn berezinian(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut bat = Battery::new("berezinian", opts);
    for (i, (p, q)) in [(1, 1), (2, 1), (2, 2), (3, 2)].into_iter().enumerate() {
        let mut rng = bat.rng(i as u64);
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let pts = separated_points(&mut rng, p + q, 0.1);
            let (bos, ferm) = pts.split_at(p);
            let ratio = sqrt_berezinian(bos, ferm, BerezinianForm::Ratio)?.value;
            for form in [BerezinianForm::Mixed, BerezinianForm::CauchyVdm] {
                worst = worst.max(rel(sqrt_berezinian(bos, ferm, form)?.value, ratio));
            }
        }
        bat.push(format!("three_forms_{p}_{q}"), worst, 1e-10);
    }
    let ens = EnsembleSpec::gue(1)?;
    let (mut diag, mut det) = (0.0f64, 0.0f64);
    for d in 1..=8 {
        let m = moment_matrix(&ens, d);
        for j in 1..=d {
            let exact = i_pow(-(j as i64 - 1)) * factorial(j - 1);
            diag = diag.max(rel(m.get(j, j), exact));
        }
        let exact = i_pow(-((d * (d - 1) / 2) as i64)) * (1..=d).map(|j| factorial(j - 1)).product::<f64>();
        det = det.max(rel(m.determinant(), exact));
    }
    bat.push("moment_diagonal", diag, 1e-15);
    bat.push("moment_determinant", det, 1e-12);
    Ok(bat.checks)
}

fn grassmann(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut bat = Battery::new("grassmann", opts);
    let mut rng = bat.rng(10);
    let (mut identity, mut spread) = (0.0f64, 0.0f64);
    let mut first = None;
    for _ in 0..20 {
        let k1 = c(rng.random_range(-1.5..1.5), 0.0);
        let k2 = c(rng.random_range(-1.5..1.5), 0.0);
        let r = check_gaussian_u11(k1, k2)?;
        identity = identity.max(r.diff);
        let c0 = *first.get_or_insert(r.constant);
        spread = spread.max((r.constant - c0).norm());
    }
    bat.push("u11_identity", identity, 1e-8);
    bat.push("u11_constant_spread", spread, 1e-8);
    let k = c(0.4, 0.0);
    let r = check_gaussian_u11(k, k)?;
    bat.push("u11_coincident", (r.lhs / GAUSSIAN_U11_CONSTANT - 1.0).norm(), 1e-8);
    Ok(bat.checks)
}

fn bessel(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut bat = Battery::new("bessel", opts);
    let f = SuperFn::gaussian(1.0, DEFAULT_PSI);
    let mut rng = bat.rng(20);
    let (mut sum_dev, mut grass_dev) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let r = SuperEigenPoint::new(
            vec![rng.random_range(-2.0..2.0)],
            vec![rng.random_range(-2.0..2.0)],
            DEFAULT_PSI,
        )?;
        let compact = d_operator_apply(&f, &r, DOperatorForm::Compact)?;
        let sum = d_operator_apply(&f, &r, DOperatorForm::Sum)?;
        let grass = d_operator_grassmann(&f, &r)?;
        sum_dev = sum_dev.max(rel(sum, compact));
        grass_dev = grass_dev.max(rel(compact, grass));
    }
    bat.push("d_operator_sum_vs_compact", sum_dev, 1e-6);
    bat.push("d_operator_vs_grassmann", grass_dev, 1e-5);

    for l in 1..=2usize {
        let mut rng = bat.rng(20 + l as u64);
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let pts = separated_points(&mut rng, 2 * l, 0.3);
            let (bos, ferm) = pts.split_at(l);
            let res = laplace_sqrtber(bos, ferm, 1e-2)?;
            worst = worst.max(res.residual.norm() / res.scale);
        }
        bat.push(format!("laplacian_annihilation_{l}"), worst, 1e-4);
    }

    let mut worst = 0.0f64;
    for (kb, kf) in [(0.7, 0.2), (0.3, 0.3), (-0.2, 0.9)] {
        let kappa = SourceKappa::new(vec![c(kb, 0.0)], vec![c(kf, 0.0)]);
        let action = phi_hat_action(&f, &kappa)?;
        let direct = check_gaussian_u11(kappa.bos[0], kappa.ferm[0])?.lhs;
        worst = worst.max((action - direct).norm());
    }
    bat.push("bessel_action_vs_grassmann", worst, 1e-8);
    Ok(bat.checks)
}

const PROBE_SOURCE: (C64, C64) = (C64::new(0.3, -0.5), C64::new(-0.2, 0.0));

fn efetov_wegner(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut bat = Battery::new("efetov_wegner", opts);
    let (k1, k2) = PROBE_SOURCE;
    for n in 1..=4 {
        let ens = EnsembleSpec::gue(n)?;
        bat.push(format!("z2_is_one_n{n}"), (efetov_wegner_z2(&ens, n, k1, k2)? - 1.0).norm(), 1e-8);
    }
    for n in 2..=3 {
        let ens = EnsembleSpec::gue(n)?;
        let same = SourceKappa::new(vec![k1], vec![k1]);
        let ew = z11_superspace(&ens, n, k1, k1, Z11Form::EfetovWegner)?;
        let comb = z11_superspace(&ens, n, k1, k1, Z11Form::CombinedDerivative)?;
        let s = generating_function_susy(&ens, &same, &SusyOptions::default())?;
        let worst = [ew, comb, s].iter().map(|z| (z - 1.0).norm()).fold(0.0, f64::max);
        bat.push(format!("coincidence_n{n}"), worst, 1e-8);
    }
    Ok(bat.checks)
}

fn ingham_siegel(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut bat = Battery::new("ingham_siegel", opts);
    let f = SuperFn::gaussian(1.0, DEFAULT_PSI);
    for n in 1..=4 {
        bat.push(format!("normalization_n{n}"), (ingham_siegel_action(&f, n, 1)? - 1.0).norm(), 1e-8);
    }
    let g = f.with_bos_poly(&[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    let oracle = ingham_siegel_action_fd(&g, 3, 1e-3)?;
    bat.push("stencil_oracle_n3", (ingham_siegel_action(&g, 3, 1)? - oracle).norm(), 1e-6);
    let (k1, k2) = PROBE_SOURCE;
    for n in 1..=2 {
        let ens = EnsembleSpec::gue(n)?;
        let hs = z11_hubbard_stratonovich_grassmann(&ens, n, k1, k2)?;
        let ss = z11_superspace(&ens, n, k1, k2, Z11Form::EfetovWegner)?;
        bat.push(format!("hubbard_stratonovich_n{n}"), rel(hs, ss), 1e-6);
    }
    Ok(bat.checks)
}

/// Distinct external-field eigenvalues used by the battery.
fn e0_for(n: usize) -> Vec<f64> {
    match n {
        2 => vec![1.0, -1.0],
        _ => (0..n).map(|j| 1.0 - 0.7 * j as f64).collect(),
    }
}

fn external_field(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut bat = Battery::new("external_field", opts);
    let (k1, k2) = PROBE_SOURCE;
    let kappa = SourceKappa::new(vec![k1], vec![k2]);
    for n in 2..=3 {
        let ens = EnsembleSpec::gue(n)?;
        for (i, alpha) in [0.0, 0.5].into_iter().enumerate() {
            let field = ExternalField::new(alpha, e0_for(n));
            let z = generating_function_external(&ens, &kappa, &field)?;
            let seed = opts.seed.wrapping_add(100 * n as u64 + i as u64);
            let mc = mc_external_field(&ens, &kappa, &field, opts.mc_samples, seed)?;
            bat.push(format!("mc_sigma_n{n}_alpha{alpha}"), mc.sigma_distance(z), 3.0);
        }
        let field0 = ExternalField::new(0.0, e0_for(n));
        let z0 = generating_function_external(&ens, &kappa, &field0)?;
        let a0 = generating_function_alpha0(&ens, &kappa)?;
        let s = generating_function_susy(&ens, &kappa, &SusyOptions::default())?;
        bat.push(format!("alpha0_consistency_n{n}"), rel(z0, a0).max(rel(z0, s)), 1e-6);
        let same = SourceKappa::new(vec![k1], vec![k1]);
        let one = generating_function_external(&ens, &same, &ExternalField::new(0.5, e0_for(n)))?;
        bat.push(format!("coincidence_n{n}"), (one - 1.0).norm(), 1e-6);
    }
    Ok(bat.checks)
}

/// Runs one battery, or all of them, and returns a report whose checks carry
/// the individual outcomes.
pub fn run_verify(suite: Suite, opts: &VerifyOptions) -> Result<Report> {
    let start = Instant::now();
    if !opts.tolerance_scale.is_finite() || opts.mc_samples < 2 {
        return Err(Error::validation("verify needs a finite tolerance scale and at least 2 samples"));
    }
    let suites: &[Suite] = match suite {
        Suite::All => &Suite::ALL[..Suite::ALL.len() - 1],
        _ => std::slice::from_ref(&suite),
    };
    let mut checks = Vec::new();
    for s in suites {
        checks.extend(match s {
            Suite::Berezinian => berezinian(opts)?,
            Suite::Grassmann => grassmann(opts)?,
            Suite::Bessel => bessel(opts)?,
            Suite::EfetovWegner => efetov_wegner(opts)?,
            Suite::InghamSiegel => ingham_siegel(opts)?,
            Suite::ExternalField => external_field(opts)?,
            Suite::All => unreachable!(),
        });
    }
    let mut params = Params::new(0, &[], &[]);
    params.n_samples = opts.mc_samples;
    params.seed = Some(opts.seed);
    let mut report = Report::assemble(format!("{VERIFY_PREFIX}{suite}"), "all".into(), params, Results::default(), checks)?;
    report.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn berezinian_suite_passes_and_corruption_fails() {
        let r = run_verify(Suite::Berezinian, &VerifyOptions::default()).unwrap();
        assert!(r.pass, "{:#?}", r.checks);
        assert!(r.is_consistent());
        assert_eq!(r.task, "verify:berezinian");
        let corrupted = VerifyOptions {
            tolerance_scale: -1.0,
            ..VerifyOptions::default()
        };
        let r = run_verify(Suite::Berezinian, &corrupted).unwrap();
        assert!(!r.pass && r.checks.iter().all(|c| !c.pass));
        assert!(r.is_consistent());
    }

    #[test]
    fn efetov_wegner_and_ingham_siegel_suites_pass() {
        for s in [Suite::EfetovWegner, Suite::InghamSiegel] {
            let r = run_verify(s, &VerifyOptions::default()).unwrap();
            assert!(r.pass, "{:#?}", r.checks);
        }
    }
}
