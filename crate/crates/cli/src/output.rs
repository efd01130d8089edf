use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

/// Writes through a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let tmp = sibling(path, ".tmp");
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// `path` with `suffix` appended to its file name.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name: OsString = path.file_name().map(OsString::from).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub argv: Vec<String>,
    pub config: Value,
    pub seeds: Value,
    pub provider: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub wall_time_secs: f64,
    pub version: &'static str,
}

impl Manifest {
    pub fn new(command: &str, provider: &str) -> Self {
        Self {
            command: command.to_string(),
            argv: std::env::args().collect(),
            config: Value::Null,
            seeds: Value::Null,
            provider: provider.to_string(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            wall_time_secs: 0.0,
            version: env!("CARGO_PKG_VERSION"),
        }
    }

    /// Stored next to the primary output as `<output>.manifest.json`.
    pub fn write_beside(mut self, primary: &Path, elapsed: Duration) -> Result<()> {
        self.wall_time_secs = elapsed.as_secs_f64();
        write_json(&sibling(primary, ".manifest.json"), &self)
    }
}

pub fn display(paths: &[&Path]) -> Vec<String> {
    paths.iter().map(|p| p.display().to_string()).collect()
}
