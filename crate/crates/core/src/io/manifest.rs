use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::dynamics::PathSeed;

use super::IoError;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Canonical config, parseable on its own.
    pub config: Value,
    pub master_seed: u64,
    pub version: String,
    pub path_seeds: Vec<PathSeed>,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Output directory that records a digest for every file it writes and
/// writes the manifest last.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileEntry>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, IoError> {
        std::fs::create_dir_all(root).map_err(|e| IoError::file(root, e))?;
        Ok(Self { root: root.to_path_buf(), files: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Write `name` (may contain `/`) under the root.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, IoError> {
        let path = self.root.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| IoError::file(parent, e))?;
        }
        std::fs::write(&path, bytes).map_err(|e| IoError::file(&path, e))?;
        self.files.retain(|f| f.name != name);
        self.files.push(FileEntry { name: name.into(), bytes: bytes.len() as u64, sha256: sha256_hex(bytes) });
        Ok(path)
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    pub fn finish(
        self,
        command: &str,
        config: Value,
        master_seed: u64,
        path_seeds: Vec<PathSeed>,
    ) -> Result<RunManifest, IoError> {
        let manifest = RunManifest {
            command: command.into(),
            config,
            master_seed,
            version: env!("CARGO_PKG_VERSION").into(),
            path_seeds,
            files: self.files,
        };
        let path = self.root.join(MANIFEST_NAME);
        let text = serde_json::to_string_pretty(&manifest).expect("manifests serialize");
        std::fs::write(&path, text).map_err(|e| IoError::file(&path, e))?;
        Ok(manifest)
    }
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest, IoError> {
    let path = dir.join(MANIFEST_NAME);
    let text = std::fs::read_to_string(&path).map_err(|e| IoError::file(&path, e))?;
    serde_json::from_str(&text).map_err(|e| IoError::Manifest(format!("{}: {e}", path.display())))
}

/// Recompute every listed digest; the first mismatch is an error.
pub fn verify_manifest(dir: &Path) -> Result<RunManifest, IoError> {
    let manifest = read_manifest(dir)?;
    for f in &manifest.files {
        let path = dir.join(&f.name);
        let bytes = std::fs::read(&path).map_err(|e| IoError::file(&path, e))?;
        let digest = sha256_hex(&bytes);
        if digest != f.sha256 || bytes.len() as u64 != f.bytes {
            return Err(IoError::Manifest(format!("{}: digest {digest} does not match {}", f.name, f.sha256)));
        }
    }
    Ok(manifest)
}
