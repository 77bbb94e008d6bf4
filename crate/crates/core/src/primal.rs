//! Primal ridge adapter over explicitly projected features.
//!
//! The state keeps the classifier `W = M Φᵀ Y` together with the memory
//! matrix `M = (ΦᵀΦ + λI)⁻¹` accumulated over every domain seen so far. A new
//! domain updates `M` through the Woodbury identity, which only factorizes an
//! `n_new × n_new` system, and corrects the old columns of `W` so that the
//! result equals ridge regression on the pooled data.

use crate::adapter::{check_disjoint, check_lambda, Adapter, DomainBatch, TargetMode};
use crate::error::{RailError, Result};
use crate::linalg::{self, Matrix};
use crate::projection::FeatureMap;

#[derive(Debug, Clone, PartialEq)]
pub struct PrimalState {
    pub(crate) weights: Matrix,
    pub(crate) memory: Matrix,
    pub(crate) lambda: f64,
    pub(crate) map: FeatureMap,
    pub(crate) learned_classes: Vec<usize>,
    pub(crate) targets: TargetMode,
    /// Text vectors of the learned classes (text-target mode only).
    pub(crate) class_texts: Option<Matrix>,
}

impl PrimalState {
    pub fn init(batch: &DomainBatch<'_>, map: FeatureMap, lambda: f64, targets: TargetMode) -> Result<Self> {
        check_lambda(lambda)?;
        batch.validate()?;
        let phi = map.project(batch.features)?;
        let y = batch.targets(targets)?;

        let mut gram = phi.tr_mul(&phi);
        linalg::add_ridge(&mut gram, lambda);
        let chol = linalg::cholesky(gram)?;
        let mut memory = chol.inverse();
        linalg::symmetrize(&mut memory);
        let weights = chol.solve(&phi.tr_mul(&y));

        Ok(PrimalState {
            weights,
            memory,
            lambda,
            map,
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
        let phi = self.map.project(batch.features)?;
        let y = batch.targets(self.targets)?;
        let n = phi.nrows();

        // M ← M − M Φᵀ (I + Φ M Φᵀ)⁻¹ Φ M
        let m_phi_t = &self.memory * phi.transpose();
        let mut inner = &phi * &m_phi_t;
        linalg::add_ridge(&mut inner, 1.0);
        debug_assert_eq!(inner.nrows(), n);
        let chol = linalg::cholesky(inner)?;
        let correction = chol.solve(&m_phi_t.transpose());
        let mut memory = &self.memory - &m_phi_t * correction;
        linalg::symmetrize(&mut memory);

        // W_old ← W_old − M Φᵀ Φ W_old ; W_new = M Φᵀ Y
        let gain = &memory * phi.transpose();
        let corrected = &self.weights - &gain * (&phi * &self.weights);
        let fresh = &gain * y;
        self.weights = match self.targets {
            TargetMode::OneHot => linalg::hstack(&corrected, &fresh),
            TargetMode::TextEmbedding => corrected + fresh,
        };
        if self.targets == TargetMode::TextEmbedding {
            let new_texts = batch.class_texts.as_ref().ok_or_else(|| {
                RailError::InvalidParameter("text-target mode needs class text vectors".into())
            })?;
            self.class_texts = Some(match &self.class_texts {
                Some(t) => linalg::vstack(t, new_texts),
                None => new_texts.clone(),
            });
        }
        self.memory = memory;
        self.learned_classes.extend_from_slice(batch.classes);
        Ok(())
    }

    /// `φ(x) · W`, one column per learned class. In text-target mode the
    /// regression output is compared to each class text vector instead.
    pub fn predict(&self, features: &Matrix) -> Result<Matrix> {
        let phi = self.map.project(features)?;
        let out = phi * &self.weights;
        Ok(match &self.class_texts {
            Some(t) if self.targets == TargetMode::TextEmbedding => out * t.transpose(),
            _ => out,
        })
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn memory(&self) -> &Matrix {
        &self.memory
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn feature_map(&self) -> &FeatureMap {
        &self.map
    }

    pub fn learned_classes(&self) -> &[usize] {
        &self.learned_classes
    }

    pub fn target_mode(&self) -> TargetMode {
        self.targets
    }
}

impl Adapter for PrimalState {
    fn learned_classes(&self) -> &[usize] {
        &self.learned_classes
    }

    fn predict(&self, features: &Matrix) -> Result<Matrix> {
        PrimalState::predict(self, features)
    }

    fn learn(&mut self, batch: &DomainBatch<'_>) -> Result<()> {
        self.update(batch)
    }
}
