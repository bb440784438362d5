//! Report persistence: one directory per run named by UTC timestamp and seed,
//! plus a `latest` file holding the name of the most recent one.

use std::fs;
use std::path::{Path, PathBuf};

use super::Report;
use crate::error::Result;

pub const REPORT_FILE: &str = "report.json";
pub const LATEST_FILE: &str = "latest";

/// Writes `report` under `out_dir` and returns the path of the JSON file.
pub fn write_report(report: &Report, out_dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(out_dir)?;
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ");
    let seed = report.params.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
    let base = format!("{stamp}-seed{seed}");
    let mut name = base.clone();
    let mut suffix = 1;
    while out_dir.join(&name).exists() {
        name = format!("{base}-{suffix}");
        suffix += 1;
    }
    let dir = out_dir.join(&name);
    fs::create_dir(&dir)?;
    let path = dir.join(REPORT_FILE);
    fs::write(&path, report.to_json()? + "\n")?;
    fs::write(out_dir.join(LATEST_FILE), format!("{name}\n"))?;
    Ok(path)
}

/// Path of the report the `latest` pointer refers to.
pub fn read_latest(out_dir: &Path) -> Result<PathBuf> {
    let name = fs::read_to_string(out_dir.join(LATEST_FILE))?;
    Ok(out_dir.join(name.trim()).join(REPORT_FILE))
}
