//! Configuration files, field snapshots, CSV and plot output, and run
//! manifests.

mod config;
mod manifest;
mod report;
mod snapshot;

pub use config::{parse_config, parse_value, render, ConsistencySpec, InitialSpec, ParsedConfig, RunSpec, ScalingConfig};
pub use manifest::{read_manifest, sha256_hex, verify_manifest, FileEntry, OutputDir, RunManifest, MANIFEST_NAME};
pub use report::{real, Format, Report, CONSISTENCY_HEADER, CONVERGENCE_HEADER, RECORD_HEADER};
pub use snapshot::{decode_snapshot, encode_snapshot, read_snapshot, write_snapshot, SnapshotError, MAGIC, VERSION};

use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::spectral::{Spectral, SpectralField};

/// A rejected config, with the dotted key path of the offending entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "`{}`: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("invalid config: {0}")]
    Config(#[from] ConfigError),
    #[error("{}: {source}", path.display())]
    Snapshot { path: PathBuf, source: SnapshotError },
    #[error("initial state from {}: {reason}", path.display())]
    Initial { path: PathBuf, reason: String },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: std::io::Error },
}

impl IoError {
    pub(crate) fn file(path: &Path, source: std::io::Error) -> Self {
        IoError::File { path: path.to_path_buf(), source }
    }

    /// True for content problems, as opposed to failed reads and writes.
    pub fn is_validation(&self) -> bool {
        !matches!(self, IoError::File { .. })
    }
}

/// Read and parse a config file. A run manifest is accepted too, in which
/// case its config echo is used. Returns the directory for resolving
/// relative paths inside the config.
pub fn load_config(path: &Path) -> Result<(ParsedConfig, PathBuf), IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::file(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| ConfigError::new("", format!("malformed JSON: {e}")))?;
    let value = match value {
        serde_json::Value::Object(mut map) if map.contains_key("files") && map.contains_key("config") => {
            map.remove("config").expect("checked")
        }
        other => other,
    };
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((parse_value(value)?, dir))
}

/// Build the initial state on the grid of `spectral`. Snapshots on another
/// grid are resampled, provided no retained coefficient is lost.
pub fn resolve_initial(spec: &InitialSpec, spectral: &Spectral, base_dir: &Path) -> Result<SpectralField, IoError> {
    match spec.split(base_dir) {
        Ok(ic) => ic.build(spectral).map_err(|e| IoError::Initial { path: PathBuf::from("<config>"), reason: e.to_string() }),
        Err(path) => {
            let field = read_snapshot(&path)?;
            if field.grid() == spectral.grid() {
                return Ok(field);
            }
            if let Some((l, _)) = field.nonzero().find(|(l, _)| !spectral.grid().contains(*l)) {
                return Err(IoError::Initial { path, reason: format!("mode {l} lies beyond the configured cutoff") });
            }
            Ok(field.resample(spectral.basis().clone()))
        }
    }
}

/// Render `report` and write its files under `out`.
pub fn emit_report(out: &mut OutputDir, report: Report<'_>, format: Format) -> Result<Vec<PathBuf>, IoError> {
    let prefix = if format == Format::Plotdata { "plotdata/" } else { "" };
    report.render(format).into_iter().map(|(name, text)| out.write(&format!("{prefix}{name}"), text.as_bytes())).collect()
}

#[cfg(test)]
mod tests;
