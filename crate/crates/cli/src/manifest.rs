//! Run manifests: what was run, on which inputs, producing which files.
//! Manifests carry content hashes only, no timestamps, so reruns reproduce
//! them byte for byte.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{io_ctx, CliError, CliResult};

pub const MANIFEST_VERSION: u32 = 1;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    Ok(sha256_hex(&std::fs::read(path).map_err(io_ctx(path))?))
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub manifest_version: u32,
    pub command: String,
    pub library_version: String,
    pub config_sha256: String,
    pub config: serde_json::Value,
    /// Input file name to SHA-256.
    pub inputs: BTreeMap<String, String>,
    /// Output file name (relative to the output directory) to SHA-256.
    pub outputs: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(command: &str, config: serde_json::Value) -> CliResult<Self> {
        let bytes = serde_json::to_vec(&config).map_err(|e| CliError::Internal(e.to_string()))?;
        Ok(Manifest {
            manifest_version: MANIFEST_VERSION,
            command: command.into(),
            library_version: arraybin::VERSION.into(),
            config_sha256: sha256_hex(&bytes),
            config,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        })
    }

    pub fn input(&mut self, role: &str, path: &Path) -> CliResult<()> {
        self.inputs.insert(role.into(), sha256_file(path)?);
        Ok(())
    }

    /// Records a file already written inside `dir`.
    pub fn output(&mut self, dir: &Path, name: &str) -> CliResult<()> {
        self.outputs.insert(name.into(), sha256_file(&dir.join(name))?);
        Ok(())
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| CliError::Internal(e.to_string()))?;
        text.push('\n');
        std::fs::write(path, text).map_err(io_ctx(path))
    }
}
