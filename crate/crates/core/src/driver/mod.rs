//! Request validation, dispatch to the computational routes, cross-method
//! comparison and the JSON report.

mod config;
mod persist;
mod verify;

pub use config::ConfigFile;
pub use persist::{read_latest, write_report, LATEST_FILE, REPORT_FILE};
pub use verify::{run_verify, Suite, VerifyOptions};

use std::time::Instant;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::detkernels::{generating_function_det, hciz_closed_form};
use crate::ensembles::{
    imag_sign, mc_external_field, mc_generating_function, mc_hciz, EnsembleSpec, ExternalField, MCEstimate,
    SourceKappa,
};
use crate::error::{Error, Result};
use crate::superfns::{check_gaussian_u11, DEFAULT_PSI, GAUSSIAN_U11_CONSTANT};
use crate::susyreps::{
    generating_function_external, generating_function_susy, z11_superspace, SusyOptions, Z11Form,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Monte Carlo sample count when the request does not set one.
pub const DEFAULT_SAMPLES: usize = 100_000;

macro_rules! string_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(&self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl std::fmt::Display for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl std::str::FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => {
                        let known: Vec<&str> = Self::ALL.iter().map(|v| v.as_str()).collect();
                        Err(Error::validation(format!(
                            "unknown {} '{other}', expected one of {}",
                            stringify!($name).to_lowercase(),
                            known.join(", ")
                        )))
                    }
                }
            }
        }
    };
}
pub(crate) use string_enum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    GeneratingFunction,
    ExternalField,
    /// Unitary-group integral; `E` and `Et` are the real parts of the bosonic
    /// and fermionic source lists.
    Hciz,
    /// Gaussian `1/1` superintegral against its eigenvalue representation.
    BesselCheck,
    IdentitySuite,
}

string_enum!(Task {
    GeneratingFunction => "generating_function",
    ExternalField => "external_field",
    Hciz => "hciz",
    BesselCheck => "bessel_check",
    IdentitySuite => "identity_suite",
});

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Mc,
    Det,
    Susy,
    All,
}

string_enum!(Method {
    Mc => "mc",
    Det => "det",
    Susy => "susy",
    All => "all",
});

impl Method {
    fn routes(&self) -> &'static [Method] {
        match self {
            Method::All => &[Method::Mc, Method::Det, Method::Susy],
            Method::Mc => &[Method::Mc],
            Method::Det => &[Method::Det],
            Method::Susy => &[Method::Susy],
        }
    }
}

/// One source entry. Bosonic entries carry `L = -sign(Im kappa)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaEntry {
    pub re: f64,
    pub im: f64,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<i8>,
}

impl KappaEntry {
    pub fn bos(z: C64) -> Self {
        KappaEntry {
            re: z.re,
            im: z.im,
            l: Some(imag_sign(z)),
        }
    }

    pub fn ferm(z: C64) -> Self {
        KappaEntry { re: z.re, im: z.im, l: None }
    }

    pub fn value(&self) -> C64 {
        C64::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative distance allowed between the determinantal and superspace values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub det_vs_susy: Option<f64>,
    /// Monte Carlo distance allowed, in standard errors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_sigma: Option<f64>,
}

impl Tolerances {
    fn resolved(&self, task: Task, k1: usize) -> Tolerances {
        let rel = match task {
            Task::BesselCheck => 1e-8,
            Task::GeneratingFunction if k1 >= 2 => 1e-5,
            _ => 1e-6,
        };
        Tolerances {
            det_vs_susy: Some(self.det_vs_susy.unwrap_or(rel)),
            mc_sigma: Some(self.mc_sigma.unwrap_or(3.0)),
        }
    }
}

fn default_psi() -> f64 {
    DEFAULT_PSI
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    #[serde(rename = "N")]
    pub n: usize,
    pub k1: usize,
    pub k2: usize,
    #[serde(default)]
    pub kappa_bos: Vec<KappaEntry>,
    #[serde(default)]
    pub kappa_ferm: Vec<KappaEntry>,
    #[serde(default = "default_psi")]
    pub psi: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub e0: Vec<f64>,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl Params {
    /// Parameters with the given sources and every optional field at its default.
    pub fn new(n: usize, bos: &[C64], ferm: &[C64]) -> Self {
        Params {
            n,
            k1: bos.len(),
            k2: ferm.len(),
            kappa_bos: bos.iter().map(|&z| KappaEntry::bos(z)).collect(),
            kappa_ferm: ferm.iter().map(|&z| KappaEntry::ferm(z)).collect(),
            psi: DEFAULT_PSI,
            alpha: 0.0,
            e0: Vec::new(),
            n_samples: DEFAULT_SAMPLES,
            seed: None,
            tolerances: Tolerances::default(),
        }
    }

    pub fn source(&self) -> SourceKappa {
        SourceKappa::new(
            self.kappa_bos.iter().map(KappaEntry::value).collect(),
            self.kappa_ferm.iter().map(KappaEntry::value).collect(),
        )
    }

    pub fn field(&self) -> ExternalField {
        ExternalField::new(self.alpha, self.e0.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputeRequest {
    pub task: Task,
    pub method: Method,
    pub params: Params,
}

impl ComputeRequest {
    pub fn new(task: Task, method: Method, params: Params) -> Self {
        ComputeRequest { task, method, params }
    }

    fn uses_mc(&self) -> bool {
        self.method.routes().contains(&Method::Mc) && route_check(self, Method::Mc).is_ok()
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        if p.n == 0 {
            return Err(Error::validation("N must be at least 1"));
        }
        if p.k2 > p.k1 || p.k1 > p.n {
            return Err(Error::validation(format!(
                "the generating function requires k2 <= k1 <= N, got k1 = {}, k2 = {}, N = {}",
                p.k1, p.k2, p.n
            )));
        }
        if p.kappa_bos.len() != p.k1 || p.kappa_ferm.len() != p.k2 {
            return Err(Error::validation(format!(
                "expected {} bosonic and {} fermionic sources, got {} and {}",
                p.k1,
                p.k2,
                p.kappa_bos.len(),
                p.kappa_ferm.len()
            )));
        }
        let finite = |x: f64| x.is_finite();
        if !p.kappa_bos.iter().chain(&p.kappa_ferm).all(|k| finite(k.re) && finite(k.im))
            || !finite(p.alpha)
            || !p.e0.iter().all(|&e| finite(e))
        {
            return Err(Error::validation("all numeric parameters must be finite"));
        }
        if !(p.psi > 0.0 && p.psi < std::f64::consts::PI) {
            return Err(Error::validation(format!("psi must lie in (0, pi), got {}", p.psi)));
        }
        if p.alpha != 0.0 {
            for a in 0..p.e0.len() {
                for b in a + 1..p.e0.len() {
                    if p.e0[a] == p.e0[b] {
                        return Err(Error::validation("E0 entries must be pairwise distinct when alpha != 0"));
                    }
                }
            }
        }
        if let Some(tol) = [p.tolerances.det_vs_susy, p.tolerances.mc_sigma].into_iter().flatten().find(|t| !(*t > 0.0)) {
            return Err(Error::validation(format!("tolerances must be positive, got {tol}")));
        }
        match self.task {
            Task::ExternalField if p.e0.len() != p.n => {
                return Err(Error::validation(format!("E0 needs N = {} entries, got {}", p.n, p.e0.len())));
            }
            Task::Hciz if p.k1 != p.n || p.k2 != p.n => {
                return Err(Error::validation("hciz takes N real entries in each source list"));
            }
            Task::Hciz if p.kappa_bos.iter().chain(&p.kappa_ferm).any(|k| k.im != 0.0) => {
                return Err(Error::validation("hciz eigenvalues must be real"));
            }
            _ => {}
        }
        for k in &p.kappa_bos {
            if k.l.is_some_and(|l| l != imag_sign(k.value())) {
                return Err(Error::validation("recorded L sign does not match Im kappa"));
            }
        }
        if self.uses_mc() {
            if p.seed.is_none() {
                return Err(Error::validation("a seed is required whenever the method includes mc"));
            }
            if p.n_samples < 2 {
                return Err(Error::validation("mc needs at least 2 samples"));
            }
        }
        if self.method != Method::All {
            route_check(self, self.method)?;
        }
        Ok(())
    }
}

/// Whether `route` exists for the request's task and parameters.
fn route_check(req: &ComputeRequest, route: Method) -> Result<()> {
    let p = &req.params;
    let no_route = |why: &str| Err(Error::validation(format!("no {route} route for {}: {why}", req.task)));
    let superspace = || -> Result<()> {
        if p.psi != DEFAULT_PSI {
            return no_route("superspace routes are implemented at psi = pi/2");
        }
        if p.k1 != p.k2 || p.k1 == 0 {
            return no_route("superspace routes need k1 = k2 >= 1");
        }
        if p.kappa_bos.iter().any(|k| k.im >= 0.0) {
            return no_route("superspace routes need Im kappa_1 < 0");
        }
        Ok(())
    };
    match (req.task, route) {
        (Task::IdentitySuite, _) => no_route("the suite has its own checks"),
        (Task::GeneratingFunction, Method::Mc | Method::Det) => Ok(()),
        (Task::GeneratingFunction, Method::Susy) => superspace(),
        (Task::ExternalField, _) if p.k1 != p.k2 || p.k1 == 0 => no_route("needs k1 = k2 >= 1"),
        (Task::ExternalField, Method::Mc) => Ok(()),
        (Task::ExternalField, Method::Det) if p.alpha != 0.0 => no_route("the determinantal route needs alpha = 0"),
        (Task::ExternalField, Method::Det) => Ok(()),
        (Task::ExternalField, Method::Susy) => superspace(),
        (Task::Hciz, Method::Mc | Method::Det) => Ok(()),
        (Task::Hciz, _) => no_route("only mc and det exist"),
        (Task::BesselCheck, _) if p.k1 != 1 || p.k2 != 1 => no_route("needs k1 = k2 = 1"),
        (Task::BesselCheck, Method::Det | Method::Susy) => Ok(()),
        (Task::BesselCheck, _) => no_route("only det and susy exist"),
        (_, Method::All) => unreachable!("routes are expanded before checking"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for ComplexValue {
    fn from(z: C64) -> Self {
        ComplexValue { re: z.re, im: z.im }
    }
}

impl ComplexValue {
    pub fn value(&self) -> C64 {
        C64::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McValue {
    pub re: f64,
    pub im: f64,
    pub stderr: f64,
}

impl McValue {
    pub fn value(&self) -> C64 {
        C64::new(self.re, self.im)
    }

    /// Distance to `x` in standard errors.
    pub fn sigma(&self, x: C64) -> f64 {
        let d = (self.value() - x).norm();
        if d == 0.0 {
            0.0
        } else {
            d / self.stderr
        }
    }
}

impl From<MCEstimate> for McValue {
    fn from(e: MCEstimate) -> Self {
        McValue {
            re: e.mean.re,
            im: e.mean.im,
            stderr: e.stderr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Results {
    pub mc: Option<McValue>,
    pub det: Option<ComplexValue>,
    pub susy: Option<ComplexValue>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Diffs {
    pub det_vs_susy: Option<f64>,
    pub mc_sigma_det: Option<f64>,
    pub mc_sigma_susy: Option<f64>,
}

impl Diffs {
    pub fn of(results: &Results) -> Diffs {
        let (det, susy) = (results.det.map(|v| v.value()), results.susy.map(|v| v.value()));
        Diffs {
            det_vs_susy: det.zip(susy).map(|(d, s)| (d - s).norm() / d.norm()),
            mc_sigma_det: results.mc.zip(det).map(|(m, d)| m.sigma(d)),
            mc_sigma_susy: results.mc.zip(susy).map(|(m, s)| m.sigma(s)),
        }
    }
}

/// One comparison against its tolerance; passes when `value <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub task: String,
    pub method: String,
    pub params: Params,
    pub results: Results,
    pub diffs: Diffs,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<Check>,
    pub pass: bool,
    pub runtime_ms: u64,
    pub version: String,
}

impl Report {
    pub(crate) fn assemble(task: String, method: String, params: Params, results: Results, checks: Vec<Check>) -> Result<Self> {
        let report = Report {
            schema_version: SCHEMA_VERSION,
            task,
            method,
            params,
            results,
            diffs: Diffs::of(&results),
            pass: checks.iter().all(|c| c.pass),
            checks,
            runtime_ms: 0,
            version: VERSION.to_string(),
        };
        report.check_finite()?;
        Ok(report)
    }

    fn check_finite(&self) -> Result<()> {
        let r = &self.results;
        let d = &self.diffs;
        let mut nums: Vec<f64> = Vec::new();
        if let Some(m) = r.mc {
            nums.extend([m.re, m.im, m.stderr]);
        }
        for v in [r.det, r.susy].into_iter().flatten() {
            nums.extend([v.re, v.im]);
        }
        nums.extend([d.det_vs_susy, d.mc_sigma_det, d.mc_sigma_susy].into_iter().flatten());
        nums.extend(self.checks.iter().flat_map(|c| [c.value, c.tolerance]));
        match nums.iter().find(|x| !x.is_finite()) {
            Some(x) => Err(Error::numerical("report contains a non-finite number", *x)),
            None => Ok(()),
        }
    }

    /// Re-derives the diffs and every pass flag from the numbers in the
    /// report; true when they match what is recorded.
    pub fn is_consistent(&self) -> bool {
        let diffs = Diffs::of(&self.results);
        let diff_checks_match = [
            ("det_vs_susy", diffs.det_vs_susy),
            ("mc_sigma_det", diffs.mc_sigma_det),
            ("mc_sigma_susy", diffs.mc_sigma_susy),
        ]
        .iter()
        .all(|(name, v)| match (self.checks.iter().find(|c| c.name == *name), v) {
            (Some(c), Some(v)) => c.value == *v,
            (None, None) => true,
            _ => false,
        });
        diffs == self.diffs
            && diff_checks_match
            && self.checks.iter().all(|c| c.pass == (c.value <= c.tolerance))
            && self.pass == self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    /// The report with the runtime zeroed; identical requests give identical payloads.
    pub fn payload_json(&self) -> Result<String> {
        Report {
            runtime_ms: 0,
            ..self.clone()
        }
        .to_json()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::validation(format!("malformed report: {e}")))
    }
}

pub(crate) const VERIFY_PREFIX: &str = "verify:";

/// Runs the requested routes and assembles the comparison. Writing the report
/// is left to the caller; a report with `pass == false` is still `Ok`.
pub fn run_compute(req: &ComputeRequest) -> Result<Report> {
    let start = Instant::now();
    req.validate()?;
    let mut params = req.params.clone();
    params.tolerances = params.tolerances.resolved(req.task, params.k1);
    for k in &mut params.kappa_bos {
        k.l = Some(imag_sign(k.value()));
    }

    if req.task == Task::IdentitySuite {
        let opts = VerifyOptions {
            seed: params.seed.unwrap_or(VerifyOptions::default().seed),
            ..VerifyOptions::default()
        };
        let mut report = run_verify(Suite::All, &opts)?;
        report.task = req.task.to_string();
        report.method = req.method.to_string();
        report.params = params;
        report.runtime_ms = start.elapsed().as_millis() as u64;
        return Ok(report);
    }

    let mut results = Results::default();
    for &route in req.method.routes() {
        if req.method == Method::All && route_check(req, route).is_err() {
            continue;
        }
        match route {
            Method::Mc => results.mc = Some(compute_mc(req.task, &params)?.into()),
            Method::Det => results.det = Some(compute_det(req.task, &params)?.into()),
            Method::Susy => results.susy = Some(compute_susy(req.task, &params)?.into()),
            Method::All => unreachable!(),
        }
    }
    let diffs = Diffs::of(&results);
    let tol = params.tolerances;
    let mut checks = Vec::new();
    if let Some(v) = diffs.det_vs_susy {
        checks.push(Check::new("det_vs_susy", v, tol.det_vs_susy.unwrap_or_default()));
    }
    if let Some(v) = diffs.mc_sigma_det {
        checks.push(Check::new("mc_sigma_det", v, tol.mc_sigma.unwrap_or_default()));
    }
    if let Some(v) = diffs.mc_sigma_susy {
        checks.push(Check::new("mc_sigma_susy", v, tol.mc_sigma.unwrap_or_default()));
    }
    let mut report = Report::assemble(req.task.to_string(), req.method.to_string(), params, results, checks)?;
    report.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

fn real_parts(list: &[KappaEntry]) -> Vec<f64> {
    list.iter().map(|k| k.re).collect()
}

fn compute_mc(task: Task, p: &Params) -> Result<MCEstimate> {
    let seed = p.seed.ok_or_else(|| Error::validation("mc needs a seed"))?;
    let ens = EnsembleSpec::gue(p.n)?;
    match task {
        Task::GeneratingFunction => mc_generating_function(&ens, &p.source(), p.n_samples, seed),
        Task::ExternalField => mc_external_field(&ens, &p.source(), &p.field(), p.n_samples, seed),
        Task::Hciz => mc_hciz(&real_parts(&p.kappa_bos), &real_parts(&p.kappa_ferm), p.n_samples, seed),
        Task::BesselCheck | Task::IdentitySuite => unreachable!("rejected by route_check"),
    }
}

fn compute_det(task: Task, p: &Params) -> Result<C64> {
    let ens = EnsembleSpec::gue(p.n)?;
    match task {
        Task::GeneratingFunction | Task::ExternalField => generating_function_det(&ens, &p.source(), None),
        Task::Hciz => hciz_closed_form(&real_parts(&p.kappa_bos), &real_parts(&p.kappa_ferm)),
        Task::BesselCheck => {
            let k = p.source();
            Ok(check_gaussian_u11(k.bos[0], k.ferm[0])?.rhs)
        }
        Task::IdentitySuite => unreachable!("rejected by route_check"),
    }
}

fn compute_susy(task: Task, p: &Params) -> Result<C64> {
    let ens = EnsembleSpec::gue(p.n)?;
    let kappa = p.source();
    match task {
        Task::GeneratingFunction if kappa.k1() == 1 => {
            z11_superspace(&ens, p.n, kappa.bos[0], kappa.ferm[0], Z11Form::EfetovWegner)
        }
        Task::GeneratingFunction => generating_function_susy(&ens, &kappa, &SusyOptions::default()),
        Task::ExternalField => generating_function_external(&ens, &kappa, &p.field()),
        Task::BesselCheck => Ok(check_gaussian_u11(kappa.bos[0], kappa.ferm[0])?.lhs / GAUSSIAN_U11_CONSTANT),
        Task::Hciz | Task::IdentitySuite => unreachable!("rejected by route_check"),
    }
}

/// Parses `"re,im;re,im;..."`; an entry without a comma is real.
pub fn parse_complex_list(s: &str) -> Result<Vec<C64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';')
        .map(|item| {
            let parts: Vec<&str> = item.split(',').map(str::trim).collect();
            let num = |t: &str| {
                t.parse::<f64>()
                    .map_err(|_| Error::validation(format!("cannot parse '{t}' in source list '{s}'")))
            };
            match parts.as_slice() {
                [re] => Ok(C64::new(num(re)?, 0.0)),
                [re, im] => Ok(C64::new(num(re)?, num(im)?)),
                _ => Err(Error::validation(format!("source entry '{item}' must be 're' or 're,im'"))),
            }
        })
        .collect()
}

/// Parses a list of reals separated by `;` or `,`.
pub fn parse_real_list(s: &str) -> Result<Vec<f64>> {
    s.split([';', ','])
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| Error::validation(format!("cannot parse '{t}' as a number"))))
        .collect()
}
