use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use susyrmt::driver::{
    parse_complex_list, parse_real_list, run_compute, run_verify, write_report, ComputeRequest, ConfigFile, Method,
    Params, Report, Suite, Task, Tolerances, VerifyOptions, DEFAULT_SAMPLES,
};
use susyrmt::{Error, Result};

const DEFAULT_OUT: &str = "runs";

/// Generating functions of Hermitian random-matrix ensembles by Monte Carlo,
/// determinantal and superspace routes.
#[derive(Debug, Parser)]
#[command(name = "susyrmt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one task by the requested methods and compare them.
    Compute(ComputeArgs),
    /// Run a fixed-seed invariant battery.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct ComputeArgs {
    /// generating_function, external_field, hciz, bessel_check or identity_suite.
    #[arg(long)]
    task: Option<String>,
    /// mc, det, susy or all.
    #[arg(long)]
    method: Option<String>,
    /// Matrix dimension.
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    k1: Option<usize>,
    #[arg(long)]
    k2: Option<usize>,
    /// Bosonic sources as "re,im;re,im;...".
    #[arg(long, allow_hyphen_values = true)]
    kappa_bos: Option<String>,
    /// Fermionic sources as "re;re;..." (or "re,im").
    #[arg(long, allow_hyphen_values = true)]
    kappa_ferm: Option<String>,
    /// Wick angle of the fermionic sector.
    #[arg(long)]
    psi: Option<f64>,
    /// External-field strength.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// External-field eigenvalues as "e1;e2;...".
    #[arg(long, allow_hyphen_values = true)]
    e0: Option<String>,
    /// Monte Carlo sample count.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Relative tolerance between the det and susy values.
    #[arg(long)]
    tol_det_susy: Option<f64>,
    /// Monte Carlo tolerance in standard errors.
    #[arg(long)]
    tol_mc_sigma: Option<f64>,
    /// TOML file with the same keys; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for run reports.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// berezinian, grassmann, bessel, efetov_wegner, ingham_siegel, external_field or all.
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Test hook: multiplies every tolerance; a negative value forces failure.
    #[arg(long, hide = true, allow_hyphen_values = true)]
    tolerance_scale: Option<f64>,
}

fn load_config(path: &Option<PathBuf>) -> Result<ConfigFile> {
    match path {
        Some(p) => ConfigFile::load(p),
        None => Ok(ConfigFile::default()),
    }
}

fn required<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::validation(format!("missing --{name} (flag or config key)")))
}

fn compute_request(args: &ComputeArgs, cfg: &ConfigFile) -> Result<ComputeRequest> {
    let task: Task = required(args.task.clone().or(cfg.task.clone()), "task")?.parse()?;
    let method: Method = args.method.clone().or(cfg.method.clone()).unwrap_or_else(|| "all".into()).parse()?;
    let bos = parse_complex_list(args.kappa_bos.as_deref().or(cfg.kappa_bos.as_deref()).unwrap_or(""))?;
    let ferm = parse_complex_list(args.kappa_ferm.as_deref().or(cfg.kappa_ferm.as_deref()).unwrap_or(""))?;
    let n = required(args.n.or(cfg.n), "N")?;
    let mut params = Params::new(n, &bos, &ferm);
    params.k1 = args.k1.or(cfg.k1).unwrap_or(bos.len());
    params.k2 = args.k2.or(cfg.k2).unwrap_or(ferm.len());
    if let Some(psi) = args.psi.or(cfg.psi) {
        params.psi = psi;
    }
    params.alpha = args.alpha.or(cfg.alpha).unwrap_or(0.0);
    params.e0 = parse_real_list(args.e0.as_deref().or(cfg.e0.as_deref()).unwrap_or(""))?;
    params.n_samples = args.samples.or(cfg.samples).unwrap_or(DEFAULT_SAMPLES);
    params.seed = args.seed.or(cfg.seed);
    let file_tol = cfg.tolerances.unwrap_or_default();
    params.tolerances = Tolerances {
        det_vs_susy: args.tol_det_susy.or(file_tol.det_vs_susy),
        mc_sigma: args.tol_mc_sigma.or(file_tol.mc_sigma),
    };
    Ok(ComputeRequest::new(task, method, params))
}

fn finish(report: &Report, out: &Path) -> Result<()> {
    let path = write_report(report, out)?;
    println!("{}", report.to_json()?);
    eprintln!("{} -> {}", if report.pass { "pass" } else { "FAIL" }, path.display());
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!("  failed {}: {:.3e} > {:.3e}", c.name, c.value, c.tolerance);
    }
    if report.pass {
        Ok(())
    } else {
        Err(Error::Verification(format!("{} check(s) failed", report.checks.iter().filter(|c| !c.pass).count())))
    }
}

fn out_dir(flag: &Option<PathBuf>, cfg: &ConfigFile) -> PathBuf {
    flag.clone().or(cfg.out.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Compute(args) => {
            let cfg = load_config(&args.config)?;
            let req = compute_request(&args, &cfg)?;
            let report = run_compute(&req)?;
            finish(&report, &out_dir(&args.out, &cfg))
        }
        Command::Verify(args) => {
            let cfg = load_config(&args.config)?;
            let suite: Suite = args.suite.clone().or(cfg.suite.clone()).unwrap_or_else(|| "all".into()).parse()?;
            let defaults = VerifyOptions::default();
            let opts = VerifyOptions {
                tolerance_scale: args.tolerance_scale.unwrap_or(defaults.tolerance_scale),
                mc_samples: args.samples.or(cfg.samples).unwrap_or(defaults.mc_samples),
                seed: args.seed.or(cfg.seed).unwrap_or(defaults.seed),
            };
            let report = run_verify(suite, &opts)?;
            finish(&report, &out_dir(&args.out, &cfg))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
