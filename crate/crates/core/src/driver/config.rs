//! Optional TOML configuration. Every key mirrors a CLI flag; flags win.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::Tolerances;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub task: Option<String>,
    pub method: Option<String>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub k1: Option<usize>,
    pub k2: Option<usize>,
    /// Same syntax as the `--kappa-bos` flag.
    pub kappa_bos: Option<String>,
    pub kappa_ferm: Option<String>,
    pub psi: Option<f64>,
    pub alpha: Option<f64>,
    pub e0: Option<String>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub suite: Option<String>,
    pub out: Option<PathBuf>,
    pub tolerances: Option<Tolerances>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::validation(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_known_keys_and_rejects_unknown() {
        let c = ConfigFile::parse(
            "task = \"generating_function\"\nN = 3\nkappa_bos = \"0.3,-0.5\"\nseed = 4\n[tolerances]\nmc_sigma = 4.0\n",
        )
        .unwrap();
        assert_eq!(c.n, Some(3));
        assert_eq!(c.tolerances.unwrap().mc_sigma, Some(4.0));
        assert!(ConfigFile::parse("colour = 1").is_err());
    }
}
