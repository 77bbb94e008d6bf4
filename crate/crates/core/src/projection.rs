//! Fixed random non-linear feature expansion and kernel functions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{RailError, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
}

impl Activation {
    fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Relu => v.max(0.0),
        }
    }
}

/// Persistable description of a random hidden layer. The weights are never
/// stored; they are regenerated from the seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RhlSpec {
    pub seed: u64,
    pub input_dim: usize,
    pub output_dim: usize,
    pub activation: Activation,
}

/// Randomly-initialized hidden layer: `act(x · weight)` with i.i.d.
/// `N(0, 1/input_dim)` weights and no bias.
#[derive(Debug, Clone, PartialEq)]
pub struct RhlParams {
    spec: RhlSpec,
    weight: Matrix,
}

impl RhlParams {
    pub fn new(seed: u64, input_dim: usize, output_dim: usize) -> Result<Self> {
        Self::from_spec(RhlSpec {
            seed,
            input_dim,
            output_dim,
            activation: Activation::Relu,
        })
    }

    pub fn from_spec(spec: RhlSpec) -> Result<Self> {
        if spec.input_dim == 0 || spec.output_dim == 0 {
            return Err(RailError::InvalidParameter(
                "hidden layer dimensions must be positive".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let std = (1.0 / spec.input_dim as f64).sqrt();
        let mut weight = Matrix::zeros(spec.input_dim, spec.output_dim);
        // fill row-major so the draw order does not depend on storage layout
        for i in 0..spec.input_dim {
            for j in 0..spec.output_dim {
                let z: f64 = rng.sample(StandardNormal);
                weight[(i, j)] = z * std;
            }
        }
        Ok(RhlParams { spec, weight })
    }

    pub fn spec(&self) -> RhlSpec {
        self.spec
    }

    pub fn weight(&self) -> &Matrix {
        &self.weight
    }

    pub fn project(&self, x: &Matrix) -> Result<Matrix> {
        if x.ncols() != self.spec.input_dim {
            return Err(RailError::DimensionMismatch(format!(
                "hidden layer expects dim {}, got {}",
                self.spec.input_dim,
                x.ncols()
            )));
        }
        let act = self.spec.activation;
        Ok((x * &self.weight).map(|v| act.apply(v)))
    }
}

/// Explicit feature map used by the primal adapter.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureMap {
    /// Raw features; turns the primal adapter into a plain linear ridge classifier.
    Identity { dim: usize },
    Rhl(RhlParams),
}

impl FeatureMap {
    pub fn input_dim(&self) -> usize {
        match self {
            FeatureMap::Identity { dim } => *dim,
            FeatureMap::Rhl(p) => p.spec.input_dim,
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            FeatureMap::Identity { dim } => *dim,
            FeatureMap::Rhl(p) => p.spec.output_dim,
        }
    }

    pub fn project(&self, x: &Matrix) -> Result<Matrix> {
        match self {
            FeatureMap::Identity { dim } => {
                if x.ncols() != *dim {
                    return Err(RailError::DimensionMismatch(format!(
                        "expected dim {dim}, got {}",
                        x.ncols()
                    )));
                }
                Ok(x.clone())
            }
            FeatureMap::Rhl(p) => p.project(x),
        }
    }
}

/// `relu(x · weight)`
pub fn rhl_project(x: &Matrix, params: &RhlParams) -> Result<Matrix> {
    params.project(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    Rbf { gamma: f64 },
    Linear,
}

impl KernelSpec {
    pub fn rbf(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(RailError::InvalidParameter(format!(
                "rbf gamma must be positive, got {gamma}"
            )));
        }
        Ok(KernelSpec::Rbf { gamma })
    }

    pub fn gamma(&self) -> Option<f64> {
        match self {
            KernelSpec::Rbf { gamma } => Some(*gamma),
            KernelSpec::Linear => None,
        }
    }

    fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            KernelSpec::Rbf { gamma } => {
                let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * sq).exp()
            }
            KernelSpec::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
        }
    }
}

/// `K[i][j] = k(a_i, b_j)`.
///
/// Each entry is evaluated directly from the two rows (no expanded-norm
/// shortcut), so `kernel_matrix(b, a)` is the exact transpose of
/// `kernel_matrix(a, b)` and the rbf diagonal of `kernel_matrix(a, a)` is
/// exactly one.
pub fn kernel_matrix(a: &Matrix, b: &Matrix, spec: &KernelSpec) -> Result<Matrix> {
    if a.ncols() != b.ncols() {
        return Err(RailError::DimensionMismatch(format!(
            "kernel inputs have dims {} and {}",
            a.ncols(),
            b.ncols()
        )));
    }
    if let KernelSpec::Rbf { gamma } = spec {
        if !(*gamma > 0.0) {
            return Err(RailError::InvalidParameter(format!("rbf gamma {gamma}")));
        }
    }
    // row-major copies keep the inner loop contiguous
    let rows = |m: &Matrix| -> Vec<Vec<f64>> {
        (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
    };
    let ar = rows(a);
    let br = rows(b);
    Ok(Matrix::from_fn(a.nrows(), b.nrows(), |i, j| spec.eval(&ar[i], &br[j])))
}
