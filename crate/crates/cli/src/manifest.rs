use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct HashedFile {
    pub path: String,
    pub sha256: String,
}

/// Record of one command invocation and everything it wrote.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Vec<String>,
    pub out_dir: String,
    pub inputs: Vec<HashedFile>,
    pub outputs: Vec<HashedFile>,
    pub started_unix: f64,
    pub finished_unix: f64,
}

/// Collects output files as they are written, then emits `manifest.json`.
pub struct OutputDir {
    root: PathBuf,
    manifest: RunManifest,
}

impl OutputDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            manifest: RunManifest {
                tool: "flatsmc",
                version: env!("CARGO_PKG_VERSION"),
                command: std::env::args().collect(),
                out_dir: root.display().to_string(),
                inputs: Vec::new(),
                outputs: Vec::new(),
                started_unix: unix_now(),
                finished_unix: 0.0,
            },
        })
    }

    pub fn record_input(&mut self, path: &Path, bytes: &[u8]) {
        self.manifest.inputs.push(HashedFile {
            path: path.display().to_string(),
            sha256: sha256_hex(bytes),
        });
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.root.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.manifest.outputs.push(HashedFile {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Writes `manifest.json`; it is not listed in itself.
    pub fn finish(mut self) -> CliResult<RunManifest> {
        self.manifest.finished_unix = unix_now();
        let path = self.root.join("manifest.json");
        let text = serde_json::to_string_pretty(&self.manifest).map_err(|e| CliError::Internal(e.to_string()))?;
        fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok(self.manifest)
    }
}
