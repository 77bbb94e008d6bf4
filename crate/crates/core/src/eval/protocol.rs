use serde::{Deserialize, Serialize};

use super::config::{AdapterKind, KernelKind, Mode, RunConfig};
use super::grid::{grid_search, needs_gamma};
use super::metrics::MetricMatrix;
use super::suite::{DomainData, DomainSuite};
use crate::adapter::{Adapter, AdapterSpec, AnyAdapter, DomainBatch, TargetMode};
use crate::error::{RailError, Result};
use crate::fusion::{classify_batch, fuse, zero_shot_batch, FusionConfig};
use crate::linalg::{self, Matrix};
use crate::projection::{FeatureMap, KernelSpec, RhlParams};
use crate::store::{sample_few_shot, TextEmbeddingTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub lambda: f64,
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub hyperparams: Hyperparams,
    pub matrix: MetricMatrix,
    /// Zero-shot accuracy of every domain over the protocol's label space.
    pub zero_shot: Vec<f64>,
}

pub fn adapter_spec(cfg: &RunConfig, hyper: &Hyperparams, input_dim: usize) -> Result<AdapterSpec> {
    Ok(match cfg.adapter {
        AdapterKind::Primal => AdapterSpec::Primal {
            map: FeatureMap::Rhl(RhlParams::new(cfg.seed, input_dim, cfg.rhl_dim)?),
            lambda: hyper.lambda,
            targets: cfg.targets,
        },
        AdapterKind::Dual => AdapterSpec::Dual {
            kernel: match cfg.kernel {
                KernelKind::Linear => KernelSpec::Linear,
                KernelKind::Rbf => KernelSpec::rbf(
                    hyper
                        .gamma
                        .ok_or_else(|| RailError::InvalidParameter("RBF kernel needs gamma".into()))?,
                )?,
            },
            lambda: hyper.lambda,
            targets: cfg.targets,
        },
    })
}

/// Few-shot training rows of domain `k` with global labels. Domain `k` is
/// sampled with seed `cfg.seed + k`.
pub fn few_shot_split(cfg: &RunConfig, suite: &DomainSuite, k: usize) -> Result<(Matrix, Vec<usize>)> {
    let dom = &suite.domains[k];
    let shots = sample_few_shot(&dom.train, cfg.shots, cfg.seed.wrapping_add(k as u64))?;
    let labels = shots.global_labels(&suite.registry)?;
    Ok((shots.features, labels))
}

/// Uses the fixed values of `cfg` and grid-searches whatever is missing.
pub fn resolve_hyperparams(cfg: &RunConfig, suite: &DomainSuite) -> Result<Hyperparams> {
    match (cfg.lambda, cfg.gamma, needs_gamma(cfg)) {
        (Some(lambda), _, false) => Ok(Hyperparams { lambda, gamma: None }),
        (Some(lambda), Some(gamma), true) => Ok(Hyperparams {
            lambda,
            gamma: Some(gamma),
        }),
        _ => Ok(grid_search(cfg, suite)?.best),
    }
}

/// Accuracy of plain zero-shot prediction over `texts`, computed without
/// the gate or any adapter.
pub fn zero_shot_accuracy(features: &Matrix, labels: &[usize], texts: &TextEmbeddingTable, scale: f64) -> Result<f64> {
    let zs = zero_shot_batch(features, texts, scale)?;
    let hits = zs
        .row_iter()
        .zip(labels)
        .filter(|(row, &l)| linalg::argmax(row.clone_owned().as_slice()) == Some(l))
        .count();
    Ok(hits as f64 / labels.len() as f64)
}

fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    hits as f64 / truth.len() as f64
}

fn batch<'a>(cfg: &RunConfig, suite: &DomainSuite, x: &'a Matrix, y: &'a [usize], dom: &'a DomainData) -> DomainBatch<'a> {
    let b = DomainBatch::new(x, y, &dom.classes);
    if cfg.targets == TargetMode::TextEmbedding {
        b.with_texts(&suite.texts)
    } else {
        b
    }
}

pub fn run(cfg: &RunConfig, suite: &DomainSuite) -> Result<RunOutput> {
    match cfg.mode {
        Mode::Xtail => run_xtail(cfg, suite),
        Mode::Mtil => run_mtil(cfg, suite),
    }
}

/// One shared adapter learns the domains in order; after every step all
/// test sets are classified over the full label space through the gate.
pub fn run_xtail(cfg: &RunConfig, suite: &DomainSuite) -> Result<RunOutput> {
    cfg.validate()?;
    let hyper = resolve_hyperparams(cfg, suite)?;
    let spec = adapter_spec(cfg, &hyper, suite.dim())?;
    let zero_shot = suite
        .domains
        .iter()
        .map(|d| zero_shot_accuracy(&d.test.features, &d.test_labels, &suite.texts, cfg.fusion.logit_scale))
        .collect::<Result<Vec<_>>>()?;

    let mut registry = suite.registry.clone();
    let mut adapter: Option<AnyAdapter> = None;
    let mut acc = Vec::with_capacity(suite.domains.len());
    for (k, dom) in suite.domains.iter().enumerate() {
        let row = (|| -> Result<Vec<f64>> {
            let (x, y) = few_shot_split(cfg, suite, k)?;
            let b = batch(cfg, suite, &x, &y, dom);
            match adapter.as_mut() {
                Some(a) => a.learn(&b)?,
                None => adapter = Some(spec.init(&b)?),
            }
            registry.mark_seen(&dom.name)?;
            suite
                .domains
                .iter()
                .map(|d| {
                    let pred = classify_batch(&d.test.features, adapter.as_ref(), &suite.texts, &registry, &cfg.fusion)?;
                    Ok(accuracy(&pred, &d.test_labels))
                })
                .collect()
        })()
        .map_err(|e| e.at_step(k + 1, &dom.name))?;
        acc.push(row);
    }
    Ok(RunOutput {
        hyperparams: hyper,
        matrix: MetricMatrix::new(suite.domain_names(), acc)?,
        zero_shot,
    })
}

/// Predicts domain `dom` inside its own label space, fusing with `adapter`
/// when the domain has been learned. Returns global class indices.
pub fn classify_in_domain(
    features: &Matrix,
    dom: &DomainData,
    adapter: Option<&AnyAdapter>,
    texts: &TextEmbeddingTable,
    cfg: &FusionConfig,
) -> Result<Vec<usize>> {
    cfg.validate()?;
    let local_texts = TextEmbeddingTable::new(texts.rows(&dom.classes), texts.prompt_template())?;
    let zs = zero_shot_batch(features, &local_texts, cfg.logit_scale)?;
    let local: Vec<usize> = (0..dom.classes.len()).collect();
    let logits = adapter.map(|a| a.predict(features)).transpose()?;
    let mut out = Vec::with_capacity(features.nrows());
    for i in 0..features.nrows() {
        let z: Vec<f64> = zs.row(i).iter().copied().collect();
        let scores = match &logits {
            Some(l) => {
                let ad: Vec<f64> = l.row(i).iter().copied().collect();
                fuse(&ad, &z, &local, cfg)?
            }
            None => z,
        };
        let k = linalg::argmax(&scores).ok_or(RailError::EmptyLabelSet)?;
        out.push(dom.classes[k]);
    }
    Ok(out)
}

/// Each learned domain gets its own adapter; every test set is scored in its
/// own domain's label space.
pub fn run_mtil(cfg: &RunConfig, suite: &DomainSuite) -> Result<RunOutput> {
    cfg.validate()?;
    let hyper = resolve_hyperparams(cfg, suite)?;
    let spec = adapter_spec(cfg, &hyper, suite.dim())?;
    let zero_shot = suite
        .domains
        .iter()
        .map(|d| {
            let pred = classify_in_domain(&d.test.features, d, None, &suite.texts, &cfg.fusion)?;
            Ok(accuracy(&pred, &d.test_labels))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut adapters: Vec<AnyAdapter> = Vec::with_capacity(suite.domains.len());
    let mut acc = Vec::with_capacity(suite.domains.len());
    for (k, dom) in suite.domains.iter().enumerate() {
        let row = (|| -> Result<Vec<f64>> {
            let (x, y) = few_shot_split(cfg, suite, k)?;
            adapters.push(spec.init(&batch(cfg, suite, &x, &y, dom))?);
            suite
                .domains
                .iter()
                .enumerate()
                .map(|(j, d)| {
                    let pred = classify_in_domain(&d.test.features, d, adapters.get(j), &suite.texts, &cfg.fusion)?;
                    Ok(accuracy(&pred, &d.test_labels))
                })
                .collect()
        })()
        .map_err(|e| e.at_step(k + 1, &dom.name))?;
        acc.push(row);
    }
    Ok(RunOutput {
        hyperparams: hyper,
        matrix: MetricMatrix::new(suite.domain_names(), acc)?,
        zero_shot,
    })
}
