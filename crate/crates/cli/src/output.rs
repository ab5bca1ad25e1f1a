use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const ARTIFACT: &str = "ptmlab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Common wrapper written around every JSON result.
#[derive(Clone, Debug, Serialize)]
pub struct Envelope<T: Serialize> {
    pub artifact: &'static str,
    pub version: &'static str,
    pub experiment: &'static str,
    pub config_sha256: String,
    pub seed: u64,
    pub copies: u128,
    pub checks: Vec<Check>,
    pub result: T,
}

pub fn to_pretty<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| CliError::Simulation(format!("cannot serialize result: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Simulation(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, bytes)
        .map_err(|e| CliError::Simulation(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}
