use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::metrics::{compute_metrics, MetricMatrix, Metrics};
use super::protocol::{Hyperparams, RunOutput};
use crate::error::Result;

/// Everything a `train-eval` run writes: the configuration it ran with, the
/// chosen hyperparameters, the full accuracy matrix and its metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub hyperparams: Hyperparams,
    pub zero_shot: Vec<f64>,
    pub matrix: MetricMatrix,
    pub metrics: Metrics,
}

impl RunReport {
    pub fn new(config: RunConfig, output: RunOutput) -> Result<Self> {
        let metrics = compute_metrics(&output.matrix)?;
        Ok(RunReport {
            config,
            hyperparams: output.hyperparams,
            zero_shot: output.zero_shot,
            matrix: output.matrix,
            metrics,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

/// Reads a metric matrix from either a saved report (`.json`) or a matrix
/// CSV.
pub fn load_matrix(path: &Path) -> Result<MetricMatrix> {
    let text = fs::read_to_string(path).map_err(|e| crate::RailError::from(e).in_file(path))?;
    if path.extension().is_some_and(|e| e == "json") {
        let value: serde_json::Value = serde_json::from_str(&text)?;
        let matrix = value.get("matrix").cloned().unwrap_or(value);
        let m: MetricMatrix = serde_json::from_value(matrix)?;
        m.validate()?;
        Ok(m)
    } else {
        MetricMatrix::from_csv(&text)
    }
}
