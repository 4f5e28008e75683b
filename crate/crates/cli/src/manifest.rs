//! Run manifest: what was run, with which settings, and what it produced.

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FailedTrial {
    pub swept_value: f64,
    pub sigma_s_db: f64,
    pub trial_index: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub software: &'static str,
    pub version: &'static str,
    pub command: String,
    pub master_seed: u64,
    pub timestamp: String,
    pub config: toml::Table,
    pub outputs: Vec<OutputFile>,
    pub failed_trials: Vec<FailedTrial>,
}

impl RunManifest {
    pub fn new(command: &str, master_seed: u64, config: toml::Table) -> Self {
        Self {
            software: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            master_seed,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            config,
            outputs: Vec::new(),
            failed_trials: Vec::new(),
        }
    }

    /// Writes `contents` to `dir/name` and records its checksum.
    pub fn emit(&mut self, dir: &Path, name: &str, contents: &[u8]) -> Result<(), CliError> {
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.outputs.push(OutputFile {
            file: name.to_string(),
            bytes: contents.len(),
            sha256: sha256_hex(contents),
        });
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
