//! Pieces shared by the primal and dual adapters.

use serde::{Deserialize, Serialize};

use crate::dual::DualState;
use crate::error::{RailError, Result};
use crate::linalg::{self, Matrix};
use crate::primal::PrimalState;
use crate::projection::{FeatureMap, KernelSpec};
use crate::store::TextEmbeddingTable;

/// Regression targets: one-hot class indicators, or the class text vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetMode {
    #[default]
    OneHot,
    TextEmbedding,
}

/// Training data for one learning step.
///
/// `labels` are global class indices and must all appear in `classes`, the
/// ordered list of every class owned by the domain (classes without samples
/// still get a column).
#[derive(Debug, Clone)]
pub struct DomainBatch<'a> {
    pub features: &'a Matrix,
    pub labels: &'a [usize],
    pub classes: &'a [usize],
    pub class_texts: Option<Matrix>,
}

impl<'a> DomainBatch<'a> {
    pub fn new(features: &'a Matrix, labels: &'a [usize], classes: &'a [usize]) -> Self {
        DomainBatch {
            features,
            labels,
            classes,
            class_texts: None,
        }
    }

    /// Attaches the text vectors of `classes`, required in text-target mode.
    pub fn with_texts(mut self, texts: &TextEmbeddingTable) -> Self {
        self.class_texts = Some(texts.rows(self.classes));
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.features.nrows() == 0 {
            return Err(RailError::InvalidParameter("empty training batch".into()));
        }
        if self.features.nrows() != self.labels.len() {
            return Err(RailError::DimensionMismatch(format!(
                "{} rows but {} labels",
                self.features.nrows(),
                self.labels.len()
            )));
        }
        if self.classes.is_empty() {
            return Err(RailError::EmptyLabelSet);
        }
        for (i, c) in self.classes.iter().enumerate() {
            if self.classes[..i].contains(c) {
                return Err(RailError::InvalidParameter(format!("class {c} listed twice")));
            }
        }
        for (row, l) in self.labels.iter().enumerate() {
            if !self.classes.contains(l) {
                return Err(RailError::LabelOutOfRange(row));
            }
        }
        if let Some(t) = &self.class_texts {
            if t.nrows() != self.classes.len() {
                return Err(RailError::DimensionMismatch(
                    "one text vector per class required".into(),
                ));
            }
        }
        Ok(())
    }

    pub(crate) fn one_hot(&self) -> Result<Matrix> {
        linalg::one_hot(self.labels, self.classes)
    }

    /// Target matrix for the requested mode, one row per sample.
    pub(crate) fn targets(&self, mode: TargetMode) -> Result<Matrix> {
        let y = self.one_hot()?;
        match mode {
            TargetMode::OneHot => Ok(y),
            TargetMode::TextEmbedding => {
                let t = self.class_texts.as_ref().ok_or_else(|| {
                    RailError::InvalidParameter("text-target mode needs class text vectors".into())
                })?;
                Ok(y * t)
            }
        }
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(RailError::InvalidLambda(lambda))
    }
}

pub(crate) fn check_disjoint(learned: &[usize], incoming: &[usize]) -> Result<()> {
    let overlap: Vec<usize> = incoming.iter().copied().filter(|c| learned.contains(c)).collect();
    if overlap.is_empty() {
        Ok(())
    } else {
        Err(RailError::OverlappingLabels(overlap))
    }
}

/// Scores every learned class for a batch of raw features.
pub trait Adapter {
    /// Global class index of each score column.
    fn learned_classes(&self) -> &[usize];

    /// `n × |learned_classes|` score matrix.
    fn predict(&self, features: &Matrix) -> Result<Matrix>;

    /// Absorbs a new domain whose classes are disjoint from the learned ones.
    fn learn(&mut self, batch: &DomainBatch<'_>) -> Result<()>;
}

/// How to build a fresh adapter.
#[derive(Debug, Clone, PartialEq)]
pub enum AdapterSpec {
    Primal { map: FeatureMap, lambda: f64, targets: TargetMode },
    Dual { kernel: KernelSpec, lambda: f64, targets: TargetMode },
}

impl AdapterSpec {
    pub fn init(&self, batch: &DomainBatch<'_>) -> Result<AnyAdapter> {
        match self {
            AdapterSpec::Primal { map, lambda, targets } => {
                PrimalState::init(batch, map.clone(), *lambda, *targets).map(AnyAdapter::Primal)
            }
            AdapterSpec::Dual { kernel, lambda, targets } => {
                DualState::init(batch, *kernel, *lambda, *targets).map(AnyAdapter::Dual)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnyAdapter {
    Primal(PrimalState),
    Dual(DualState),
}

impl Adapter for AnyAdapter {
    fn learned_classes(&self) -> &[usize] {
        match self {
            AnyAdapter::Primal(s) => s.learned_classes(),
            AnyAdapter::Dual(s) => s.learned_classes(),
        }
    }

    fn predict(&self, features: &Matrix) -> Result<Matrix> {
        match self {
            AnyAdapter::Primal(s) => s.predict(features),
            AnyAdapter::Dual(s) => s.predict(features),
        }
    }

    fn learn(&mut self, batch: &DomainBatch<'_>) -> Result<()> {
        match self {
            AnyAdapter::Primal(s) => s.update(batch),
            AnyAdapter::Dual(s) => s.update(batch),
        }
    }
}
