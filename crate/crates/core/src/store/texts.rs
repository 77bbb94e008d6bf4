use std::fs;
use std::path::Path;

use super::format::{self, Manifest, ManifestRole};
use super::registry::LabelRegistry;
use crate::error::{RailError, Result};
use crate::linalg::Matrix;

pub const DEFAULT_PROMPT: &str = "A photo of a {}.";

/// Accepted deviation of a stored text vector from unit norm (f32 storage).
const STORED_NORM_TOLERANCE: f64 = 1e-4;

/// Class text vectors for a single domain, one row per class.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainTexts {
    pub domain_name: String,
    pub class_names: Vec<String>,
    pub vectors: Matrix,
    pub prompt_template: String,
}

/// Fills the `{}` slot of a prompt template.
pub fn render_prompt(template: &str, class_name: &str) -> String {
    template.replacen("{}", class_name, 1)
}

/// Text vectors for every global class, row `i` belonging to class `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TextEmbeddingTable {
    vectors: Matrix,
    prompt_template: String,
}

impl TextEmbeddingTable {
    /// Builds a table from rows already in global class order. Rows are
    /// renormalized after the unit-norm check.
    pub fn new(vectors: Matrix, prompt_template: impl Into<String>) -> Result<Self> {
        if vectors.nrows() == 0 {
            return Err(RailError::EmptyLabelSet);
        }
        let mut vectors = vectors;
        for (i, mut row) in vectors.row_iter_mut().enumerate() {
            if row.iter().any(|v| !v.is_finite()) {
                return Err(RailError::NonFiniteValue(i));
            }
            let norm = row.norm();
            if (norm - 1.0).abs() > STORED_NORM_TOLERANCE {
                return Err(RailError::InvalidParameter(format!(
                    "text vector {i} has norm {norm}"
                )));
            }
            row /= norm;
        }
        Ok(TextEmbeddingTable {
            vectors,
            prompt_template: prompt_template.into(),
        })
    }

    /// Stacks per-domain tables in registry order; every registered class
    /// must be covered.
    pub fn assemble(registry: &LabelRegistry, domains: &[DomainTexts]) -> Result<Self> {
        let d = registry.feature_dim();
        let mut rows = Matrix::zeros(registry.len(), d);
        let mut covered = vec![false; registry.len()];
        let mut template = None;
        for texts in domains {
            if texts.vectors.ncols() != d {
                return Err(RailError::DimensionMismatch(format!(
                    "text table for {} has dim {}, expected {d}",
                    texts.domain_name,
                    texts.vectors.ncols()
                )));
            }
            for (k, name) in texts.class_names.iter().enumerate() {
                let idx = registry.index_of(name).ok_or_else(|| {
                    RailError::ManifestMismatch(format!("text for unregistered class {name:?}"))
                })?;
                rows.row_mut(idx).copy_from(&texts.vectors.row(k));
                covered[idx] = true;
            }
            template.get_or_insert_with(|| texts.prompt_template.clone());
        }
        if let Some(missing) = covered.iter().position(|c| !c) {
            return Err(RailError::ManifestMismatch(format!(
                "no text vector for class {:?}",
                registry.class_name(missing).unwrap_or_default()
            )));
        }
        Self::new(rows, template.unwrap_or_else(|| DEFAULT_PROMPT.to_string()))
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn prompt_template(&self) -> &str {
        &self.prompt_template
    }

    /// Rows for the listed global classes.
    pub fn rows(&self, classes: &[usize]) -> Matrix {
        crate::linalg::select_rows(&self.vectors, classes)
    }
}

pub fn save_text_table(path: &Path, texts: &DomainTexts, source: &str) -> Result<()> {
    let labels: Vec<usize> = (0..texts.class_names.len()).collect();
    let bytes = format::encode(&texts.vectors, &labels, labels.len(), true);
    fs::write(path, bytes)?;
    format::write_manifest(
        &format::manifest_path(path),
        &Manifest {
            domain_name: texts.domain_name.clone(),
            class_names: texts.class_names.clone(),
            role: ManifestRole::Text,
            normalized: Some(true),
            prompt_template: Some(texts.prompt_template.clone()),
            source: source.to_string(),
        },
    )
}

pub fn load_text_table(path: &Path) -> Result<DomainTexts> {
    let inner = || -> Result<DomainTexts> {
        let raw = format::decode(&fs::read(path)?, path)?;
        let manifest = format::read_manifest(&format::manifest_path(path))?;
        if manifest.role != ManifestRole::Text {
            return Err(RailError::ManifestMismatch("expected a text table".into()));
        }
        if manifest.class_names.len() != raw.n_classes || raw.features.nrows() != raw.n_classes {
            return Err(RailError::ManifestMismatch(
                "text table must hold exactly one row per class".into(),
            ));
        }
        if raw.labels.iter().enumerate().any(|(i, &l)| i != l) {
            return Err(RailError::ManifestMismatch(
                "text table rows must be in class order".into(),
            ));
        }
        Ok(DomainTexts {
            domain_name: manifest.domain_name,
            class_names: manifest.class_names,
            vectors: raw.features,
            prompt_template: manifest
                .prompt_template
                .unwrap_or_else(|| DEFAULT_PROMPT.to_string()),
        })
    };
    inner().map_err(|e| e.in_file(path))
}
