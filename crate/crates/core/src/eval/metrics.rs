//! Transfer / Average / Last over a step × domain accuracy matrix.

use serde::{Deserialize, Serialize};

use crate::error::{RailError, Result};

/// `acc[i][j]`: accuracy on domain `j`'s test set after learning step `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricMatrix {
    pub domain_order: Vec<String>,
    pub acc: Vec<Vec<f64>>,
}

impl MetricMatrix {
    pub fn new(domain_order: Vec<String>, acc: Vec<Vec<f64>>) -> Result<Self> {
        let m = MetricMatrix { domain_order, acc };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.acc.is_empty() || self.domain_order.is_empty() {
            return Err(RailError::InvalidParameter("metric matrix is empty".into()));
        }
        for row in &self.acc {
            if row.len() != self.domain_order.len() {
                return Err(RailError::DimensionMismatch(format!(
                    "row of length {} for {} domains",
                    row.len(),
                    self.domain_order.len()
                )));
            }
            if row.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(RailError::InvalidParameter(
                    "accuracies must lie in [0, 1]".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        self.acc.len()
    }

    pub fn n_domains(&self) -> usize {
        self.domain_order.len()
    }

    /// Matrix as CSV: a header of domain names, then one row per step.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step");
        for name in &self.domain_order {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (i, row) in self.acc.iter().enumerate() {
            out.push_str(&(i + 1).to_string());
            for v in row {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| RailError::InvalidParameter("empty CSV".into()))?;
        let domain_order: Vec<String> = header.split(',').skip(1).map(|s| s.trim().to_string()).collect();
        let mut acc = Vec::new();
        for line in lines {
            let row = line
                .split(',')
                .skip(1)
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| RailError::InvalidParameter(format!("bad accuracy {s:?}: {e}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            acc.push(row);
        }
        Self::new(domain_order, acc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainMetrics {
    pub domain: String,
    /// Mean accuracy before the domain was learned; absent for the first.
    pub transfer: Option<f64>,
    pub average: f64,
    pub last: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub transfer: Option<f64>,
    pub average: f64,
    pub last: f64,
    pub per_domain: Vec<DomainMetrics>,
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Aggregates a metric matrix.
///
/// Transfer averages every cell above the diagonal (domains evaluated before
/// they were learned), Average every cell, Last the final row. Per-domain
/// values are the same reductions restricted to one column.
pub fn compute_metrics(m: &MetricMatrix) -> Result<Metrics> {
    m.validate()?;
    let steps = m.n_steps();
    let mut per_domain = Vec::with_capacity(m.n_domains());
    let mut upper = Vec::new();
    let mut all = Vec::new();
    for (j, name) in m.domain_order.iter().enumerate() {
        let column: Vec<f64> = m.acc.iter().map(|row| row[j]).collect();
        let before: Vec<f64> = column[..j.min(steps)].to_vec();
        upper.extend_from_slice(&before);
        all.extend_from_slice(&column);
        per_domain.push(DomainMetrics {
            domain: name.clone(),
            transfer: mean(&before),
            average: mean(&column).unwrap_or_default(),
            last: column[steps - 1],
        });
    }
    Ok(Metrics {
        transfer: mean(&upper),
        average: mean(&all).unwrap_or_default(),
        last: mean(&m.acc[steps - 1]).unwrap_or_default(),
        per_domain,
    })
}
