//! Binary embedding files and their JSON manifests.
//!
//! Layout (little endian):
//!
//! ```text
//! 0..8    magic "RAILEMB1"
//! 8..12   u32 feature_dim
//! 12..16  u32 n_classes
//! 16..24  u64 n_samples
//! 24      u8  normalized flag
//! 25..    n_samples * feature_dim f32, row-major
//!         n_samples u32 labels
//! ```
//!
//! The manifest lives next to the binary with a `.json` extension.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::dataset::{EmbeddingDataset, Role};
use crate::error::{RailError, Result};
use crate::linalg::Matrix;

pub const MAGIC: &[u8; 8] = b"RAILEMB1";
pub const HEADER_LEN: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManifestRole {
    Train,
    Test,
    Text,
}

impl From<Role> for ManifestRole {
    fn from(role: Role) -> Self {
        match role {
            Role::Train => ManifestRole::Train,
            Role::Test => ManifestRole::Test,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub domain_name: String,
    pub class_names: Vec<String>,
    pub role: ManifestRole,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalized: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_template: Option<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub source: String,
}

/// Decoded binary payload, before manifest checks.
#[derive(Debug, Clone, PartialEq)]
pub struct RawEmbeddings {
    pub n_classes: usize,
    pub normalized: bool,
    pub features: Matrix,
    pub labels: Vec<usize>,
}

pub fn manifest_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn encode(features: &Matrix, labels: &[usize], n_classes: usize, normalized: bool) -> Vec<u8> {
    let (n, d) = features.shape();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * n * d + 4 * n);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(d as u32).to_le_bytes());
    out.extend_from_slice(&(n_classes as u32).to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.push(u8::from(normalized));
    for i in 0..n {
        for j in 0..d {
            out.extend_from_slice(&(features[(i, j)] as f32).to_le_bytes());
        }
    }
    for &label in labels {
        out.extend_from_slice(&(label as u32).to_le_bytes());
    }
    out
}

/// Parses and validates a binary payload. `origin` is only used in errors.
pub fn decode(bytes: &[u8], origin: &Path) -> Result<RawEmbeddings> {
    if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
        return Err(RailError::BadMagic(origin.to_path_buf()));
    }
    let d = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let n_classes = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let n = u64::from_le_bytes(bytes[16..24].try_into().unwrap()) as usize;
    let normalized = bytes[24] != 0;

    let expected = n
        .checked_mul(d)
        .and_then(|nd| nd.checked_add(n))
        .and_then(|words| words.checked_mul(4))
        .and_then(|b| b.checked_add(HEADER_LEN));
    if d == 0 || expected != Some(bytes.len()) {
        return Err(RailError::DimensionMismatch(format!(
            "header declares {n} rows of dim {d}, payload is {} bytes",
            bytes.len() - HEADER_LEN
        )));
    }

    let payload = &bytes[HEADER_LEN..];
    let mut features = Matrix::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            let at = 4 * (i * d + j);
            let v = f32::from_le_bytes(payload[at..at + 4].try_into().unwrap());
            if !v.is_finite() {
                return Err(RailError::NonFiniteValue(i));
            }
            features[(i, j)] = f64::from(v);
        }
    }
    let label_bytes = &payload[4 * n * d..];
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = u32::from_le_bytes(label_bytes[4 * i..4 * i + 4].try_into().unwrap()) as usize;
        if label >= n_classes {
            return Err(RailError::LabelOutOfRange(i));
        }
        labels.push(label);
    }
    Ok(RawEmbeddings {
        n_classes,
        normalized,
        features,
        labels,
    })
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| RailError::from(e).in_file(path))?;
    serde_json::from_str(&text).map_err(|e| RailError::from(e).in_file(path))
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn check_manifest(raw: &RawEmbeddings, manifest: &Manifest) -> Result<()> {
    if manifest.class_names.len() != raw.n_classes {
        return Err(RailError::ManifestMismatch(format!(
            "manifest lists {} classes, header declares {}",
            manifest.class_names.len(),
            raw.n_classes
        )));
    }
    if let Some(flag) = manifest.normalized {
        if flag != raw.normalized {
            return Err(RailError::ManifestMismatch(
                "normalized flag differs between header and manifest".into(),
            ));
        }
    }
    Ok(())
}

/// Writes `path` and its manifest.
pub fn save_embeddings(path: &Path, dataset: &EmbeddingDataset, source: &str) -> Result<()> {
    dataset.validate()?;
    let bytes = encode(
        &dataset.features,
        &dataset.labels,
        dataset.n_classes(),
        dataset.normalized,
    );
    let mut file = fs::File::create(path)?;
    file.write_all(&bytes)?;
    write_manifest(
        &manifest_path(path),
        &Manifest {
            domain_name: dataset.domain_name.clone(),
            class_names: dataset.class_names.clone(),
            role: dataset.role.into(),
            normalized: Some(dataset.normalized),
            prompt_template: None,
            source: source.to_string(),
        },
    )
}

/// Reads and validates an embedding file plus its manifest. Features are
/// returned as stored; normalization is left to the caller.
pub fn load_embeddings(path: &Path) -> Result<EmbeddingDataset> {
    load_inner(path).map_err(|e| match e {
        e @ RailError::File { .. } => e,
        e => e.in_file(path),
    })
}

fn load_inner(path: &Path) -> Result<EmbeddingDataset> {
    let bytes = fs::read(path)?;
    let raw = decode(&bytes, path)?;
    let manifest = read_manifest(&manifest_path(path))?;
    check_manifest(&raw, &manifest)?;
    let role = match manifest.role {
        ManifestRole::Train => Role::Train,
        ManifestRole::Test => Role::Test,
        ManifestRole::Text => {
            return Err(RailError::ManifestMismatch(
                "expected a train or test split, found a text table".into(),
            ))
        }
    };
    let mut ds = EmbeddingDataset::new(
        manifest.domain_name,
        raw.features,
        raw.labels,
        manifest.class_names,
        role,
    )?;
    ds.normalized = raw.normalized;
    Ok(ds)
}
