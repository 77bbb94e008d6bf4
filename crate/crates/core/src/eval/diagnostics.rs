//! Domain prototype correlations and in-domain accuracy of a trained adapter.
//!
//! A class weight vector is the adapter's scoring direction for that class:
//! a column of `W` for the primal form, `(1/m) M_dᵀ α_c` (the
//! kernel-weighted mean of the stored prototypes) for the dual form. A
//! domain prototype is the mean of its classes' weight vectors.

use serde::{Deserialize, Serialize};

use super::suite::DomainSuite;
use crate::adapter::{Adapter, AnyAdapter, TargetMode};
use crate::error::{RailError, Result};
use crate::fusion::argmax_global;
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub domains: Vec<String>,
    /// Pairwise Pearson coefficients between domain prototypes.
    pub cc: Vec<Vec<f64>>,
    /// Fraction of each domain's test items whose adapter-only prediction
    /// falls in the right domain.
    pub in_domain_accuracy: Vec<f64>,
}

impl Diagnostics {
    pub fn mean_off_diagonal_cc(&self) -> f64 {
        let n = self.cc.len();
        if n < 2 {
            return 0.0;
        }
        let sum: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| self.cc[i][j])
            .sum();
        sum / (n * (n - 1)) as f64
    }

    pub fn mean_in_domain_accuracy(&self) -> f64 {
        self.in_domain_accuracy.iter().sum::<f64>() / self.in_domain_accuracy.len() as f64
    }
}

/// Pearson correlation; 0 when either vector is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "pearson needs equal lengths");
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        (sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0)
    }
}

/// Weight vectors of every learned class, one column each.
pub fn class_weights(adapter: &AnyAdapter) -> Matrix {
    let (base, texts) = match adapter {
        AnyAdapter::Primal(s) => (s.weights.clone(), s.class_texts.as_ref().filter(|_| s.targets == TargetMode::TextEmbedding)),
        AnyAdapter::Dual(s) => (
            s.prototypes.tr_mul(&s.alpha) / s.prototypes.nrows() as f64,
            s.class_texts.as_ref().filter(|_| s.targets == TargetMode::TextEmbedding),
        ),
    };
    match texts {
        Some(t) => base * t.transpose(),
        None => base,
    }
}

/// Correlations and in-domain accuracy over the domains of `suite` that the
/// adapter has fully learned.
pub fn domain_prototype_diagnostics(adapter: &AnyAdapter, suite: &DomainSuite) -> Result<Diagnostics> {
    let learned = adapter.learned_classes();
    let doms: Vec<usize> = (0..suite.domains.len())
        .filter(|&k| suite.domains[k].classes.iter().all(|c| learned.contains(c)))
        .collect();
    if doms.len() < 2 {
        return Err(RailError::InsufficientDomains(doms.len()));
    }
    let weights = class_weights(adapter);
    let prototypes: Vec<Vec<f64>> = doms
        .iter()
        .map(|&k| {
            let classes = &suite.domains[k].classes;
            let mut p = vec![0.0; weights.nrows()];
            for c in classes {
                let col = learned.iter().position(|l| l == c).expect("class is learned");
                for (v, w) in p.iter_mut().zip(weights.column(col).iter()) {
                    *v += w / classes.len() as f64;
                }
            }
            p
        })
        .collect();
    let n = doms.len();
    let mut cc = vec![vec![0.0; n]; n];
    for i in 0..n {
        cc[i][i] = 1.0;
        for j in i + 1..n {
            let r = pearson(&prototypes[i], &prototypes[j]);
            cc[i][j] = r;
            cc[j][i] = r;
        }
    }
    let in_domain_accuracy = doms
        .iter()
        .map(|&k| {
            let dom = &suite.domains[k];
            let logits = adapter.predict(&dom.test.features)?;
            let mut hits = 0;
            for row in logits.row_iter() {
                let scores: Vec<f64> = row.iter().copied().collect();
                let pred = argmax_global(&scores, learned).ok_or(RailError::EmptyLabelSet)?;
                if dom.classes.contains(&pred) {
                    hits += 1;
                }
            }
            Ok(hits as f64 / dom.test.n_samples() as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Diagnostics {
        domains: doms.iter().map(|&k| suite.domains[k].name.clone()).collect(),
        cc,
        in_domain_accuracy,
    })
}
