use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{AdapterKind, RunConfig};
use super::metrics::compute_metrics;
use super::protocol::{resolve_hyperparams, run};
use super::suite::DomainSuite;
use crate::error::{RailError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    RhlDim,
    Beta,
}

impl FromStr for SweepAxis {
    type Err = RailError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rhl_dim" | "rhl-dim" => Ok(SweepAxis::RhlDim),
            "beta" => Ok(SweepAxis::Beta),
            other => Err(RailError::InvalidParameter(format!("unknown sweep axis {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub transfer: Option<f64>,
    pub average: f64,
    pub last: f64,
    /// Wall-clock seconds spent on the protocol run.
    pub seconds: f64,
}

/// Reruns the configured protocol once per value of `axis`.
///
/// For a beta sweep the hyperparameters are resolved once and shared by
/// every row; an RHL sweep resolves them per dimension.
pub fn sweep_ablation(cfg: &RunConfig, suite: &DomainSuite, axis: SweepAxis, values: &[f64]) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(RailError::EmptyGrid);
    }
    if axis == SweepAxis::RhlDim && cfg.adapter != AdapterKind::Primal {
        return Err(RailError::InvalidParameter(
            "an RHL sweep needs the primal adapter".into(),
        ));
    }
    let mut base = cfg.clone();
    if axis == SweepAxis::Beta {
        let hyper = resolve_hyperparams(cfg, suite)?;
        base.lambda = Some(hyper.lambda);
        base.gamma = hyper.gamma.or(cfg.gamma);
    }
    values
        .iter()
        .map(|&value| {
            let mut c = base.clone();
            match axis {
                SweepAxis::Beta => c.fusion.beta = value,
                SweepAxis::RhlDim => {
                    if !(value >= 1.0 && value.fract() == 0.0) {
                        return Err(RailError::InvalidParameter(format!("bad RHL dimension {value}")));
                    }
                    c.rhl_dim = value as usize;
                }
            }
            let start = Instant::now();
            let out = run(&c, suite)?;
            let seconds = start.elapsed().as_secs_f64();
            let m = compute_metrics(&out.matrix)?;
            Ok(SweepRow {
                value,
                transfer: m.transfer,
                average: m.average,
                last: m.last,
                seconds,
            })
        })
        .collect()
}

pub fn sweep_csv(axis: SweepAxis, rows: &[SweepRow]) -> String {
    let name = match axis {
        SweepAxis::RhlDim => "rhl_dim",
        SweepAxis::Beta => "beta",
    };
    let mut out = format!("{name},transfer,average,last,seconds\n");
    for r in rows {
        let transfer = r.transfer.map(|t| t.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{},{},{:.6}\n", r.value, transfer, r.average, r.last, r.seconds));
    }
    out
}
