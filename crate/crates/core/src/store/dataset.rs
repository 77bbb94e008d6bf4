use serde::{Deserialize, Serialize};

use super::registry::LabelRegistry;
use crate::error::{RailError, Result};
use crate::linalg::{self, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Train,
    Test,
}

/// One domain's split: a feature matrix with one row per sample.
///
/// `labels` index into `class_names`, i.e. they are local to the domain;
/// [`EmbeddingDataset::global_labels`] maps them through the registry.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingDataset {
    pub domain_name: String,
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
    pub role: Role,
    pub normalized: bool,
}

impl EmbeddingDataset {
    pub fn new(
        domain_name: impl Into<String>,
        features: Matrix,
        labels: Vec<usize>,
        class_names: Vec<String>,
        role: Role,
    ) -> Result<Self> {
        let ds = EmbeddingDataset {
            domain_name: domain_name.into(),
            features,
            labels,
            class_names,
            role,
            normalized: false,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        let (n, d) = self.features.shape();
        if n == 0 || d == 0 {
            return Err(RailError::DimensionMismatch(format!(
                "dataset {} has shape {n}x{d}",
                self.domain_name
            )));
        }
        if self.labels.len() != n {
            return Err(RailError::DimensionMismatch(format!(
                "{} labels for {n} rows",
                self.labels.len()
            )));
        }
        if self.class_names.is_empty() {
            return Err(RailError::EmptyLabelSet);
        }
        for row in 0..n {
            if self.features.row(row).iter().any(|v| !v.is_finite()) {
                return Err(RailError::NonFiniteValue(row));
            }
            if self.labels[row] >= self.class_names.len() {
                return Err(RailError::LabelOutOfRange(row));
            }
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Scales every non-zero row to unit L2 norm.
    pub fn l2_normalize(&mut self) {
        for mut row in self.features.row_iter_mut() {
            let norm = row.norm();
            if norm > 0.0 {
                row /= norm;
            }
        }
        self.normalized = true;
    }

    /// Global class indices of every row, resolved through the registry.
    pub fn global_labels(&self, registry: &LabelRegistry) -> Result<Vec<usize>> {
        let range = registry.domain_classes(&self.domain_name)?;
        if range.len() != self.class_names.len() {
            return Err(RailError::ManifestMismatch(format!(
                "domain {} registered with {} classes, dataset lists {}",
                self.domain_name,
                range.len(),
                self.class_names.len()
            )));
        }
        for (k, name) in self.class_names.iter().enumerate() {
            if registry.class_name(range.start + k) != Some(name.as_str()) {
                return Err(RailError::ManifestMismatch(format!(
                    "class {name:?} of {} is not registered at index {}",
                    self.domain_name,
                    range.start + k
                )));
            }
        }
        if self.dim() != registry.feature_dim() {
            return Err(RailError::DimensionMismatch(format!(
                "dataset dim {} vs registry dim {}",
                self.dim(),
                registry.feature_dim()
            )));
        }
        Ok(self.labels.iter().map(|&l| range.start + l).collect())
    }

    /// New dataset holding the listed rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> EmbeddingDataset {
        EmbeddingDataset {
            domain_name: self.domain_name.clone(),
            features: linalg::select_rows(&self.features, rows),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            class_names: self.class_names.clone(),
            role: self.role,
            normalized: self.normalized,
        }
    }

    /// Row indices grouped by local class.
    pub fn rows_by_class(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.class_names.len()];
        for (row, &label) in self.labels.iter().enumerate() {
            groups[label].push(row);
        }
        groups
    }
}
