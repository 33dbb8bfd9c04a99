//! Writing result files with their provenance sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::results::ExperimentResult;
use super::spec::ExperimentSpec;
use crate::error::Result;

/// Package version and `git describe` of the build.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const GIT_DESCRIBE: &str = env!("HYBEAM_GIT_DESCRIBE");

#[derive(Serialize)]
struct Sidecar<'a> {
    version: &'a str,
    git_describe: &'a str,
    spec: &'a ExperimentSpec,
}

/// `results.csv` → `results.csv.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

pub fn sidecar_json(spec: &ExperimentSpec) -> Result<String> {
    let body = Sidecar { version: VERSION, git_describe: GIT_DESCRIBE, spec };
    serde_json::to_string_pretty(&body).map_err(|e| crate::Error::Io(e.to_string()))
}

/// Write the CSV and its JSON sidecar.
pub fn write_result(path: &Path, result: &ExperimentResult, spec: &ExperimentSpec) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, result.to_csv())?;
    fs::write(sidecar_path(path), sidecar_json(spec)?)?;
    Ok(())
}

pub fn read_result(path: &Path) -> Result<ExperimentResult> {
    ExperimentResult::from_csv(&fs::read_to_string(path)?)
}
