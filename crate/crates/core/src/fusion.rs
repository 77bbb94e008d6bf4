//! Training-free fusion of zero-shot and adapter predictions.
//!
//! The zero-shot argmax over every known class decides the path. When it
//! lands on an unseen class the zero-shot prediction is returned untouched,
//! otherwise the adapter scores are blended with the zero-shot
//! probabilities of the learned classes.

use serde::{Deserialize, Serialize};

use crate::adapter::Adapter;
use crate::error::{RailError, Result};
use crate::linalg::{self, Matrix};
use crate::store::{LabelRegistry, TextEmbeddingTable};

pub const DEFAULT_BETA: f64 = 0.8;
pub const DEFAULT_LOGIT_SCALE: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FusionConfig {
    /// Weight of the zero-shot term on the in-distribution path.
    pub beta: f64,
    /// Multiplier on cosine similarities before the zero-shot softmax.
    pub logit_scale: f64,
    /// Blend raw adapter scores instead of their softmax.
    pub raw_fusion: bool,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            beta: DEFAULT_BETA,
            logit_scale: DEFAULT_LOGIT_SCALE,
            raw_fusion: false,
        }
    }
}

impl FusionConfig {
    pub fn with_beta(beta: f64) -> Self {
        FusionConfig {
            beta,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(RailError::InvalidParameter(format!(
                "beta must lie in [0, 1], got {}",
                self.beta
            )));
        }
        if !(self.logit_scale > 0.0 && self.logit_scale.is_finite()) {
            return Err(RailError::InvalidParameter(format!(
                "logit scale must be positive, got {}",
                self.logit_scale
            )));
        }
        Ok(())
    }
}

/// Softmax over `scale ·` cosine similarity to every class text vector.
pub fn zero_shot_logits(image: &[f64], texts: &TextEmbeddingTable, scale: f64) -> Result<Vec<f64>> {
    let x = Matrix::from_row_slice(1, image.len(), image);
    let probs = zero_shot_batch(&x, texts, scale)?;
    Ok(probs.row(0).iter().copied().collect())
}

/// Row-wise [`zero_shot_logits`] for a feature matrix.
pub fn zero_shot_batch(features: &Matrix, texts: &TextEmbeddingTable, scale: f64) -> Result<Matrix> {
    if texts.is_empty() {
        return Err(RailError::EmptyLabelSet);
    }
    if features.ncols() != texts.dim() {
        return Err(RailError::DimensionMismatch(format!(
            "image dim {} vs text dim {}",
            features.ncols(),
            texts.dim()
        )));
    }
    let mut sims = features * texts.vectors().transpose();
    for (i, mut row) in sims.row_iter_mut().enumerate() {
        let norm = features.row(i).norm();
        let inv = if norm > 0.0 { scale / norm } else { 0.0 };
        let p = linalg::softmax(&row.iter().map(|s| s * inv).collect::<Vec<_>>());
        row.iter_mut().zip(p).for_each(|(r, v)| *r = v);
    }
    Ok(sims)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    /// Zero-shot argmax is a seen class.
    Id(usize),
    /// Zero-shot argmax is an unseen class.
    Ood(usize),
}

impl Gate {
    pub fn class(self) -> usize {
        match self {
            Gate::Id(c) | Gate::Ood(c) => c,
        }
    }
}

pub fn gate(zs: &[f64], registry: &LabelRegistry) -> Result<Gate> {
    if zs.len() != registry.len() {
        return Err(RailError::DimensionMismatch(format!(
            "{} zero-shot scores for {} classes",
            zs.len(),
            registry.len()
        )));
    }
    let top = linalg::argmax(zs).ok_or(RailError::EmptyLabelSet)?;
    Ok(if registry.is_seen(top) {
        Gate::Id(top)
    } else {
        Gate::Ood(top)
    })
}

/// `(1 − β) · softmax(adapter) + β · zs[learned]`, aligned with `learned`.
///
/// The zero-shot slice is taken as is, without renormalizing over the
/// learned classes.
pub fn fuse(adapter_logits: &[f64], zs: &[f64], learned: &[usize], cfg: &FusionConfig) -> Result<Vec<f64>> {
    if adapter_logits.len() != learned.len() {
        return Err(RailError::DimensionMismatch(format!(
            "{} adapter scores for {} learned classes",
            adapter_logits.len(),
            learned.len()
        )));
    }
    if let Some(&bad) = learned.iter().find(|&&c| c >= zs.len()) {
        return Err(RailError::DimensionMismatch(format!(
            "learned class {bad} outside the zero-shot label space"
        )));
    }
    let adapter = if cfg.raw_fusion {
        adapter_logits.to_vec()
    } else {
        linalg::softmax(adapter_logits)
    };
    Ok(adapter
        .iter()
        .zip(learned)
        .map(|(a, &c)| (1.0 - cfg.beta) * a + cfg.beta * zs[c])
        .collect())
}

/// Argmax of `scores` mapped through `classes`, ties toward the lowest
/// global index.
pub(crate) fn argmax_global(scores: &[f64], classes: &[usize]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (&c, &v) in classes.iter().zip(scores) {
        match best {
            Some((bc, bv)) if v < bv || (v == bv && c > bc) => {}
            _ => best = Some((c, v)),
        }
    }
    best.map(|(c, _)| c)
}

fn check_consistent<A: Adapter + ?Sized>(adapter: Option<&A>, registry: &LabelRegistry) -> Result<()> {
    let mut learned: Vec<usize> = adapter.map(|a| a.learned_classes().to_vec()).unwrap_or_default();
    learned.sort_unstable();
    if learned != registry.seen_classes() {
        return Err(RailError::InvalidParameter(
            "adapter classes differ from the registry's seen classes".into(),
        ));
    }
    Ok(())
}

/// Full pipeline for one image.
pub fn classify<A: Adapter + ?Sized>(
    image: &[f64],
    adapter: Option<&A>,
    texts: &TextEmbeddingTable,
    registry: &LabelRegistry,
    cfg: &FusionConfig,
) -> Result<usize> {
    let x = Matrix::from_row_slice(1, image.len(), image);
    Ok(classify_batch(&x, adapter, texts, registry, cfg)?[0])
}

/// Full pipeline for every row of `features`. The adapter only runs on
/// rows routed to the in-distribution path.
pub fn classify_batch<A: Adapter + ?Sized>(
    features: &Matrix,
    adapter: Option<&A>,
    texts: &TextEmbeddingTable,
    registry: &LabelRegistry,
    cfg: &FusionConfig,
) -> Result<Vec<usize>> {
    cfg.validate()?;
    check_consistent(adapter, registry)?;
    let zs = zero_shot_batch(features, texts, cfg.logit_scale)?;
    let gates: Vec<Gate> = zs
        .row_iter()
        .map(|row| gate(row.clone_owned().as_slice(), registry))
        .collect::<Result<_>>()?;

    let id_rows: Vec<usize> = (0..gates.len())
        .filter(|&i| matches!(gates[i], Gate::Id(_)))
        .collect();
    let mut out: Vec<usize> = gates.iter().map(|g| g.class()).collect();
    let adapter = match adapter {
        Some(a) if !id_rows.is_empty() => a,
        _ => return Ok(out),
    };
    let learned = adapter.learned_classes();
    let logits = adapter.predict(&linalg::select_rows(features, &id_rows))?;
    for (k, &row) in id_rows.iter().enumerate() {
        let ad: Vec<f64> = logits.row(k).iter().copied().collect();
        let z: Vec<f64> = zs.row(row).iter().copied().collect();
        let fused = fuse(&ad, &z, learned, cfg)?;
        out[row] = argmax_global(&fused, learned).ok_or(RailError::EmptyLabelSet)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapter::{DomainBatch, TargetMode};
    use crate::primal::PrimalState;
    use crate::projection::FeatureMap;

    fn orthonormal_table(n: usize) -> TextEmbeddingTable {
        TextEmbeddingTable::new(Matrix::identity(n, n), "{}").unwrap()
    }

    #[test]
    fn zero_shot_direct_softmax() {
        let texts = orthonormal_table(3);
        let p = zero_shot_logits(&[1.0, 0.0, 0.0], &texts, 1.0).unwrap();
        let e = std::f64::consts::E;
        assert!((p[0] - e / (e + 2.0)).abs() < 1e-12);
        assert!((p[1] - 1.0 / (e + 2.0)).abs() < 1e-12);
        assert!((p[0] - 0.5761).abs() < 1e-4 && (p[2] - 0.2119).abs() < 1e-4);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_shot_uniform_and_sharp() {
        let texts = orthonormal_table(4);
        let p = zero_shot_logits(&[0.5, 0.5, 0.5, 0.5], &texts, 100.0).unwrap();
        assert!(p.iter().all(|v| (v - 0.25).abs() < 1e-12));
        let q = zero_shot_logits(&[0.8, 0.6, 0.0, 0.0], &texts, 1e4).unwrap();
        assert!((q[0] - 1.0).abs() < 1e-12);
        assert!(matches!(
            zero_shot_logits(&[1.0], &texts, 1.0),
            Err(RailError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn gate_membership_and_ties() {
        let mut reg = LabelRegistry::new(2).unwrap();
        reg.register_domain("a", &["a0", "a1", "a2"]).unwrap();
        reg.register_domain("b", &["b0", "b1", "b2"]).unwrap();
        reg.mark_seen("a").unwrap();
        assert_eq!(gate(&[0.1, 0.6, 0.1, 0.1, 0.05, 0.05], &reg).unwrap(), Gate::Id(1));
        assert_eq!(gate(&[0.1, 0.1, 0.1, 0.1, 0.5, 0.1], &reg).unwrap(), Gate::Ood(4));
        // exact tie between seen 2 and unseen 5
        assert_eq!(gate(&[0.0, 0.0, 0.5, 0.0, 0.0, 0.5], &reg).unwrap(), Gate::Id(2));
    }

    #[test]
    fn fuse_endpoints_and_mix() {
        let ad = [2.0, -1.0];
        let zs = [0.1, 0.2, 0.3, 0.4];
        let learned = [1, 2];
        let sm = linalg::softmax(&ad);
        assert_eq!(fuse(&ad, &zs, &learned, &FusionConfig::with_beta(0.0)).unwrap(), sm);
        assert_eq!(fuse(&ad, &zs, &learned, &FusionConfig::with_beta(1.0)).unwrap(), vec![0.2, 0.3]);

        // adapter softmax [0.9, 0.1] from logits ln 9 apart
        let ad = [9f64.ln(), 0.0];
        let zs = [0.2, 0.3];
        let f = fuse(&ad, &zs, &[0, 1], &FusionConfig::with_beta(0.8)).unwrap();
        assert!((f[0] - 0.34).abs() < 1e-12);
        assert!((f[1] - 0.26).abs() < 1e-12);
        assert!(fuse(&ad, &zs, &[0], &FusionConfig::default()).is_err());
    }

    #[test]
    fn raw_fusion_uses_scores() {
        let cfg = FusionConfig {
            raw_fusion: true,
            ..FusionConfig::with_beta(0.5)
        };
        let f = fuse(&[2.0, 0.0], &[0.2, 0.4], &[0, 1], &cfg).unwrap();
        assert_eq!(f, vec![1.1, 0.2]);
    }

    #[test]
    fn no_learned_domains_means_zero_shot() {
        let mut reg = LabelRegistry::new(3).unwrap();
        reg.register_domain("a", &["x", "y", "z"]).unwrap();
        let texts = orthonormal_table(3);
        let c = classify::<PrimalState>(&[0.1, 0.9, 0.2], None, &texts, &reg, &FusionConfig::default()).unwrap();
        assert_eq!(c, 1);
    }

    #[test]
    fn ood_path_ignores_adapter() {
        let mut reg = LabelRegistry::new(2).unwrap();
        reg.register_domain("a", &["x"]).unwrap();
        reg.register_domain("b", &["y"]).unwrap();
        reg.mark_seen("a").unwrap();
        let texts = orthonormal_table(2);
        let x = Matrix::from_row_slice(3, 2, &[1.0, 0.0, 0.9, 0.1, 1.0, 0.2]);
        let adapter = PrimalState::init(
            &DomainBatch::new(&x, &[0, 0, 0], &[0]),
            FeatureMap::Identity { dim: 2 },
            0.1,
            TargetMode::OneHot,
        )
        .unwrap();
        let out = classify(&[0.1, 1.0], Some(&adapter), &texts, &reg, &FusionConfig::default()).unwrap();
        assert_eq!(out, 1);
        let out = classify(&[1.0, 0.1], Some(&adapter), &texts, &reg, &FusionConfig::default()).unwrap();
        assert_eq!(out, 0);
    }

    #[test]
    fn inconsistent_registry_is_rejected() {
        let mut reg = LabelRegistry::new(2).unwrap();
        reg.register_domain("a", &["x"]).unwrap();
        let texts = orthonormal_table(2);
        let x = Matrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let adapter = PrimalState::init(
            &DomainBatch::new(&x, &[0], &[0]),
            FeatureMap::Identity { dim: 2 },
            0.1,
            TargetMode::OneHot,
        )
        .unwrap();
        // "a" never marked seen
        let mut reg2 = reg.clone();
        reg2.register_domain("b", &["y"]).unwrap();
        assert!(classify(&[1.0, 0.0], Some(&adapter), &texts, &reg2, &FusionConfig::default()).is_err());
    }

    #[test]
    fn global_argmax_tie_breaks_low() {
        assert_eq!(argmax_global(&[0.5, 0.5], &[7, 3]), Some(3));
        assert_eq!(argmax_global(&[0.4, 0.5], &[7, 3]), Some(3));
        assert_eq!(argmax_global(&[0.6, 0.5], &[7, 3]), Some(7));
    }

    #[test]
    fn config_validation() {
        assert!(FusionConfig::with_beta(1.2).validate().is_err());
        let cfg = FusionConfig {
            logit_scale: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        assert_eq!(FusionConfig::default().beta, 0.8);
    }
}
