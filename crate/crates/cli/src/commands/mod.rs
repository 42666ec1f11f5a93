//! Command implementations and shared artifact plumbing.

pub mod calibrate;
pub mod report;
pub mod steady;
pub mod sweep;
pub mod transient;

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::exit::CliError;

/// Creates the output directory and returns it.
pub fn prepare_out_dir(dir: &Path) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::io(format!("cannot create output directory {}: {e}", dir.display())))?;
    Ok(dir.to_path_buf())
}

/// Writes a JSON artifact with a trailing newline. Serialization is
/// deterministic, so identical runs produce byte-identical files.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::io(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| CliError::io(format!("writing {}: {e}", path.display())))?;
    Ok(())
}

/// Run metadata sidecar. This is the only artifact carrying wall-clock data,
/// keeping every other output reproducible byte for byte.
#[derive(Serialize)]
pub struct RunMeta {
    pub command: &'static str,
    pub started_unix_s: f64,
    pub elapsed_s: f64,
    pub threads: usize,
}

pub fn write_meta(out_dir: &Path, meta: &RunMeta) -> Result<(), CliError> {
    write_json(&out_dir.join("run_meta.json"), meta)
}

pub fn now_unix() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}
