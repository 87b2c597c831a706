//! Bundle files: a JSON header `<stem>.json` next to a raw blob `<stem>.bin`
//! of little-endian interleaved complex values (`f32` real, `f32` imaginary).
//!
//! The header records the layout version, the blob file name, the array shape
//! and axis names, plus free-form metadata for the particular kind of data.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const LAYOUT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleHeader {
    pub layout_version: u32,
    pub kind: String,
    pub endianness: String,
    pub sample_format: String,
    pub blob: String,
    pub axes: Vec<String>,
    pub shape: Vec<usize>,
    #[serde(default)]
    pub meta: serde_json::Value,
}

impl BundleHeader {
    pub fn new(kind: &str, axes: &[&str], shape: &[usize], meta: serde_json::Value) -> Self {
        BundleHeader {
            layout_version: LAYOUT_VERSION,
            kind: kind.into(),
            endianness: "little".into(),
            sample_format: "complex64".into(),
            blob: String::new(),
            axes: axes.iter().map(|s| s.to_string()).collect(),
            shape: shape.to_vec(),
            meta,
        }
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("json"), stem.with_extension("bin"))
}

pub fn encode_blob(data: &[Complex64]) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(data.len() * 8);
    for z in data {
        bytes.extend_from_slice(&(z.re as f32).to_le_bytes());
        bytes.extend_from_slice(&(z.im as f32).to_le_bytes());
    }
    bytes
}

pub fn decode_blob(bytes: &[u8]) -> Result<Vec<Complex64>> {
    if bytes.len() % 8 != 0 {
        return Err(Error::InvalidInput(format!("blob length {} is not a multiple of 8", bytes.len())));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Complex64::new(re as f64, im as f64)
        })
        .collect())
}

/// Writes `<stem>.json` and `<stem>.bin`; returns both paths.
pub fn write_bundle(stem: &Path, mut header: BundleHeader, data: &[Complex64]) -> Result<(PathBuf, PathBuf)> {
    if header.len() != data.len() {
        return Err(Error::InvalidInput(format!("shape {:?} does not match {} values", header.shape, data.len())));
    }
    let (json, bin) = paths(stem);
    header.blob = bin.file_name().and_then(|s| s.to_str()).unwrap_or_default().to_string();
    fs::write(&bin, encode_blob(data))?;
    fs::write(&json, serde_json::to_string_pretty(&header)? + "\n")?;
    Ok((json, bin))
}

/// Reads a bundle given either its stem or the path of its JSON header.
pub fn read_bundle(path: &Path) -> Result<(BundleHeader, Vec<Complex64>)> {
    let (json, _) = paths(path);
    let header: BundleHeader = serde_json::from_str(&fs::read_to_string(&json)?)?;
    if header.layout_version != LAYOUT_VERSION {
        return Err(Error::InvalidInput(format!("unsupported bundle layout version {}", header.layout_version)));
    }
    if header.endianness != "little" || header.sample_format != "complex64" {
        return Err(Error::InvalidInput("bundle must be little-endian complex64".into()));
    }
    let bin = json.with_file_name(&header.blob);
    let data = decode_blob(&fs::read(&bin)?)?;
    if data.len() != header.len() {
        return Err(Error::InvalidInput(format!("blob holds {} values, header shape {:?}", data.len(), header.shape)));
    }
    Ok((header, data))
}
