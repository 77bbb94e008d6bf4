//! Dual (kernel) ridge adapter.
//!
//! The training embeddings themselves are the stored prototypes. Each new
//! domain appends its rows to the prototype memory, grows the Gram matrix
//! along the diagonal (new-vs-old and new-vs-new blocks only), extends the
//! label matrix block-diagonally and re-solves `(K + λI) α = C`.

use crate::adapter::{check_disjoint, check_lambda, Adapter, DomainBatch, TargetMode};
use crate::error::{RailError, Result};
use crate::linalg::{self, Matrix};
use crate::projection::{kernel_matrix, KernelSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub(crate) gram: Matrix,
    pub(crate) alpha: Matrix,
    pub(crate) prototypes: Matrix,
    pub(crate) label_matrix: Matrix,
    pub(crate) lambda: f64,
    pub(crate) kernel: KernelSpec,
    pub(crate) learned_classes: Vec<usize>,
    pub(crate) targets: TargetMode,
    pub(crate) class_texts: Option<Matrix>,
}

fn solve_alpha(gram: &Matrix, labels: &Matrix, lambda: f64) -> Result<Matrix> {
    let mut system = gram.clone();
    linalg::add_ridge(&mut system, lambda);
    Ok(linalg::cholesky(system)?.solve(labels))
}

impl DualState {
    pub fn init(batch: &DomainBatch<'_>, kernel: KernelSpec, lambda: f64, targets: TargetMode) -> Result<Self> {
        check_lambda(lambda)?;
        batch.validate()?;
        let prototypes = batch.features.clone();
        let gram = kernel_matrix(&prototypes, &prototypes, &kernel)?;
        let label_matrix = batch.targets(targets)?;
        let alpha = solve_alpha(&gram, &label_matrix, lambda)?;
        Ok(DualState {
            gram,
            alpha,
            prototypes,
            label_matrix,
            lambda,
            kernel,
            learned_classes: batch.classes.to_vec(),
            targets,
            class_texts: match targets {
                TargetMode::OneHot => None,
                TargetMode::TextEmbedding => batch.class_texts.clone(),
            },
        })
    }

    pub fn update(&mut self, batch: &DomainBatch<'_>) -> Result<()> {
        batch.validate()?;
        check_disjoint(&self.learned_classes, batch.classes)?;
        if batch.features.ncols() != self.prototypes.ncols() {
            return Err(RailError::DimensionMismatch(format!(
                "prototypes have dim {}, batch has {}",
                self.prototypes.ncols(),
                batch.features.ncols()
            )));
        }
        let m = self.gram.nrows();
        let n = batch.features.nrows();
        let cross = kernel_matrix(batch.features, &self.prototypes, &self.kernel)?;
        let own = kernel_matrix(batch.features, batch.features, &self.kernel)?;

        let mut gram = Matrix::zeros(m + n, m + n);
        gram.view_mut((0, 0), (m, m)).copy_from(&self.gram);
        gram.view_mut((m, 0), (n, m)).copy_from(&cross);
        gram.view_mut((0, m), (m, n)).copy_from(&cross.transpose());
        gram.view_mut((m, m), (n, n)).copy_from(&own);

        let y = batch.targets(self.targets)?;
        let label_matrix = match self.targets {
            TargetMode::OneHot => {
                let old_cols = self.label_matrix.ncols();
                let mut c = Matrix::zeros(m + n, old_cols + y.ncols());
                c.view_mut((0, 0), (m, old_cols)).copy_from(&self.label_matrix);
                c.view_mut((m, old_cols), (n, y.ncols())).copy_from(&y);
                c
            }
            TargetMode::TextEmbedding => linalg::vstack(&self.label_matrix, &y),
        };
        let alpha = solve_alpha(&gram, &label_matrix, self.lambda)?;

        if self.targets == TargetMode::TextEmbedding {
            let new_texts = batch.class_texts.as_ref().ok_or_else(|| {
                RailError::InvalidParameter("text-target mode needs class text vectors".into())
            })?;
            self.class_texts = Some(match &self.class_texts {
                Some(t) => linalg::vstack(t, new_texts),
                None => new_texts.clone(),
            });
        }
        self.prototypes = linalg::vstack(&self.prototypes, batch.features);
        self.gram = gram;
        self.label_matrix = label_matrix;
        self.alpha = alpha;
        self.learned_classes.extend_from_slice(batch.classes);
        Ok(())
    }

    /// `K(x, M_d) · α`, one column per learned class.
    pub fn predict(&self, features: &Matrix) -> Result<Matrix> {
        if features.ncols() != self.prototypes.ncols() {
            return Err(RailError::DimensionMismatch(format!(
                "expected dim {}, got {}",
                self.prototypes.ncols(),
                features.ncols()
            )));
        }
        let out = kernel_matrix(features, &self.prototypes, &self.kernel)? * &self.alpha;
        Ok(match &self.class_texts {
            Some(t) if self.targets == TargetMode::TextEmbedding => out * t.transpose(),
            _ => out,
        })
    }

    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    pub fn alpha(&self) -> &Matrix {
        &self.alpha
    }

    pub fn prototypes(&self) -> &Matrix {
        &self.prototypes
    }

    pub fn label_matrix(&self) -> &Matrix {
        &self.label_matrix
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    pub fn learned_classes(&self) -> &[usize] {
        &self.learned_classes
    }

    pub fn target_mode(&self) -> TargetMode {
        self.targets
    }

    /// Number of stored prototypes.
    pub fn memory_rows(&self) -> usize {
        self.prototypes.nrows()
    }
}

impl Adapter for DualState {
    fn learned_classes(&self) -> &[usize] {
        &self.learned_classes
    }

    fn predict(&self, features: &Matrix) -> Result<Matrix> {
        DualState::predict(self, features)
    }

    fn learn(&mut self, batch: &DomainBatch<'_>) -> Result<()> {
        self.update(batch)
    }
}
