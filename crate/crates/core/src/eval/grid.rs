use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{AdapterKind, KernelKind, RunConfig};
use super::protocol::{adapter_spec, few_shot_split, Hyperparams};
use super::suite::DomainSuite;
use crate::adapter::{Adapter, DomainBatch, TargetMode};
use crate::error::{RailError, Result};
use crate::linalg::{self, Matrix};
use crate::store::TextEmbeddingTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub lambda: f64,
    pub gamma: Option<f64>,
    /// Mean squared validation error; absent when the fit failed.
    pub error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOutcome {
    pub best: Hyperparams,
    pub points: Vec<GridPoint>,
}

/// The eleven fusion ratios 0.0, 0.1, …, 1.0.
pub fn standard_beta_grid() -> Vec<f64> {
    vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
}

pub(crate) fn needs_gamma(cfg: &RunConfig) -> bool {
    cfg.adapter == AdapterKind::Dual && cfg.kernel == KernelKind::Rbf
}

/// Stratified split of row indices into (fit, validation). Each class with
/// at least two rows gives `round(fraction · count)` rows to validation,
/// clamped so both sides keep at least one.
pub fn validation_split(labels: &[usize], fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut groups = vec![Vec::new(); n_classes];
    for (row, &l) in labels.iter().enumerate() {
        groups[l].push(row);
    }
    let (mut fit, mut val) = (Vec::new(), Vec::new());
    for mut rows in groups {
        rows.shuffle(&mut rng);
        let take = if rows.len() < 2 {
            0
        } else {
            ((fraction * rows.len() as f64).round() as usize).clamp(1, rows.len() - 1)
        };
        val.extend_from_slice(&rows[..take]);
        fit.extend_from_slice(&rows[take..]);
    }
    fit.sort_unstable();
    val.sort_unstable();
    (fit, val)
}

/// Chooses the missing hyperparameters of `cfg` on the few-shot set of the
/// first domain only. Values already fixed in `cfg` are kept.
pub fn grid_search(cfg: &RunConfig, suite: &DomainSuite) -> Result<GridOutcome> {
    cfg.validate()?;
    let first = suite
        .domains
        .first()
        .ok_or_else(|| RailError::InvalidParameter("domain sequence is empty".into()))?;
    let (features, labels) = few_shot_split(cfg, suite, 0)?;
    let lambdas = match cfg.lambda {
        Some(l) => vec![l],
        None => cfg.grid.lambdas.clone(),
    };
    let gammas = match (needs_gamma(cfg), cfg.gamma) {
        (false, _) => Vec::new(),
        (true, Some(g)) => vec![g],
        (true, None) => cfg.grid.gammas.clone(),
    };
    grid_search_on(cfg, &features, &labels, &first.classes, &suite.texts, &lambdas, &gammas)
}

/// Grid search over explicit candidate lists. `gammas` is ignored unless the
/// configuration uses an RBF kernel. Ties go to the larger lambda, then to
/// the earlier gamma.
pub fn grid_search_on(
    cfg: &RunConfig,
    features: &Matrix,
    labels: &[usize],
    classes: &[usize],
    texts: &TextEmbeddingTable,
    lambdas: &[f64],
    gammas: &[f64],
) -> Result<GridOutcome> {
    let gamma_axis: Vec<Option<f64>> = if needs_gamma(cfg) {
        if gammas.is_empty() {
            return Err(RailError::EmptyGrid);
        }
        gammas.iter().copied().map(Some).collect()
    } else {
        vec![None]
    };
    if lambdas.is_empty() {
        return Err(RailError::EmptyGrid);
    }
    let mut lambda_axis = lambdas.to_vec();
    lambda_axis.sort_by(|a, b| b.total_cmp(a));

    let local: Vec<usize> = labels
        .iter()
        .map(|l| classes.iter().position(|c| c == l).ok_or(RailError::LabelOutOfRange(*l)))
        .collect::<Result<_>>()?;
    let (fit_rows, val_rows) = validation_split(&local, cfg.grid.validation_fraction, cfg.seed);
    if val_rows.is_empty() {
        return Err(RailError::InvalidParameter(
            "validation split is empty; the first domain needs two samples of some class".into(),
        ));
    }
    let fit_x = linalg::select_rows(features, &fit_rows);
    let fit_y: Vec<usize> = fit_rows.iter().map(|&r| labels[r]).collect();
    let val_x = linalg::select_rows(features, &val_rows);
    let val_y: Vec<usize> = val_rows.iter().map(|&r| labels[r]).collect();
    let val_targets = linalg::one_hot(&val_y, classes)?;

    let mut points = Vec::with_capacity(lambda_axis.len() * gamma_axis.len());
    let mut best: Option<(f64, Hyperparams)> = None;
    for &lambda in &lambda_axis {
        for &gamma in &gamma_axis {
            let hyper = Hyperparams { lambda, gamma };
            let error = validation_error(cfg, &hyper, &fit_x, &fit_y, classes, texts, &val_x, &val_targets)?;
            if let Some(e) = error {
                if best.as_ref().is_none_or(|(b, _)| e < *b) {
                    best = Some((e, hyper.clone()));
                }
            }
            points.push(GridPoint { lambda, gamma, error });
        }
    }
    let best = best.ok_or(RailError::SingularSystem)?.1;
    Ok(GridOutcome { best, points })
}

#[allow(clippy::too_many_arguments)]
fn validation_error(
    cfg: &RunConfig,
    hyper: &Hyperparams,
    fit_x: &Matrix,
    fit_y: &[usize],
    classes: &[usize],
    texts: &TextEmbeddingTable,
    val_x: &Matrix,
    val_targets: &Matrix,
) -> Result<Option<f64>> {
    let spec = adapter_spec(cfg, hyper, fit_x.ncols())?;
    let mut batch = DomainBatch::new(fit_x, fit_y, classes);
    if cfg.targets == TargetMode::TextEmbedding {
        batch = batch.with_texts(texts);
    }
    let adapter = match spec.init(&batch) {
        Ok(a) => a,
        Err(RailError::SingularSystem) => return Ok(None),
        Err(e) => return Err(e),
    };
    let pred = adapter.predict(val_x)?;
    let err = (pred - val_targets).norm_squared() / val_x.nrows() as f64;
    Ok(err.is_finite().then_some(err))
}
