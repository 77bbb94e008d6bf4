//! Versioned binary checkpoints for adapter state.
//!
//! ```text
//! 0..8   magic "RAILCKP1"
//! 8..12  u32 version
//! 12     u8 kind (1 = primal, 2 = dual)
//! ...    fields, little endian; matrices as u32 rows, u32 cols, f64 row-major
//! ```
//!
//! Matrices are stored at full precision so a resumed run continues
//! bit-identically. Random hidden-layer weights are regenerated from their
//! seed. The dual Gram matrix is stored even though it can be recomputed.

use std::fs;
use std::path::Path;

use crate::adapter::{AnyAdapter, TargetMode};
use crate::dual::DualState;
use crate::error::{RailError, Result};
use crate::linalg::Matrix;
use crate::primal::PrimalState;
use crate::projection::{Activation, FeatureMap, KernelSpec, RhlParams, RhlSpec};

pub const MAGIC: &[u8; 8] = b"RAILCKP1";
pub const VERSION: u32 = 1;

const KIND_PRIMAL: u8 = 1;
const KIND_DUAL: u8 = 2;

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) {
        self.0.extend_from_slice(&(v as u32).to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn classes(&mut self, c: &[usize]) {
        self.u32(c.len());
        c.iter().for_each(|&v| self.u32(v));
    }
    fn matrix(&mut self, m: &Matrix) {
        self.u32(m.nrows());
        self.u32(m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                self.f64(m[(i, j)]);
            }
        }
    }
    fn optional_matrix(&mut self, m: Option<&Matrix>) {
        match m {
            Some(m) => {
                self.u8(1);
                self.matrix(m);
            }
            None => self.u8(0),
        }
    }
    fn targets(&mut self, t: TargetMode) {
        self.u8(match t {
            TargetMode::OneHot => 0,
            TargetMode::TextEmbedding => 1,
        });
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .at
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| RailError::DimensionMismatch("truncated checkpoint".into()))?;
        let out = &self.bytes[self.at..end];
        self.at = end;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn classes(&mut self) -> Result<Vec<usize>> {
        let n = self.u32()?;
        (0..n).map(|_| self.u32()).collect()
    }
    fn matrix(&mut self) -> Result<Matrix> {
        let rows = self.u32()?;
        let cols = self.u32()?;
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = self.f64()?;
            }
        }
        Ok(m)
    }
    fn optional_matrix(&mut self) -> Result<Option<Matrix>> {
        match self.u8()? {
            0 => Ok(None),
            1 => self.matrix().map(Some),
            t => Err(RailError::InvalidParameter(format!("bad option tag {t}"))),
        }
    }
    fn targets(&mut self) -> Result<TargetMode> {
        match self.u8()? {
            0 => Ok(TargetMode::OneHot),
            1 => Ok(TargetMode::TextEmbedding),
            t => Err(RailError::InvalidParameter(format!("bad target mode {t}"))),
        }
    }
}

fn header(kind: u8) -> Writer {
    let mut w = Writer::default();
    w.0.extend_from_slice(MAGIC);
    w.u32(VERSION as usize);
    w.u8(kind);
    w
}

pub fn encode(adapter: &AnyAdapter) -> Vec<u8> {
    match adapter {
        AnyAdapter::Primal(s) => encode_primal(s),
        AnyAdapter::Dual(s) => encode_dual(s),
    }
}

fn encode_primal(s: &PrimalState) -> Vec<u8> {
    let mut w = header(KIND_PRIMAL);
    w.f64(s.lambda);
    w.targets(s.targets);
    match &s.map {
        FeatureMap::Identity { dim } => {
            w.u8(0);
            w.u32(*dim);
        }
        FeatureMap::Rhl(p) => {
            let spec = p.spec();
            w.u8(1);
            w.u64(spec.seed);
            w.u32(spec.input_dim);
            w.u32(spec.output_dim);
            w.u8(match spec.activation {
                Activation::Relu => 0,
            });
        }
    }
    w.classes(&s.learned_classes);
    w.matrix(&s.weights);
    w.matrix(&s.memory);
    w.optional_matrix(s.class_texts.as_ref());
    w.0
}

fn encode_dual(s: &DualState) -> Vec<u8> {
    let mut w = header(KIND_DUAL);
    w.f64(s.lambda);
    w.targets(s.targets);
    match s.kernel {
        KernelSpec::Linear => w.u8(0),
        KernelSpec::Rbf { gamma } => {
            w.u8(1);
            w.f64(gamma);
        }
    }
    w.classes(&s.learned_classes);
    w.matrix(&s.prototypes);
    w.matrix(&s.label_matrix);
    w.matrix(&s.alpha);
    w.matrix(&s.gram);
    w.optional_matrix(s.class_texts.as_ref());
    w.0
}

pub fn decode(bytes: &[u8]) -> Result<AnyAdapter> {
    if bytes.len() < 13 || &bytes[..8] != MAGIC {
        return Err(RailError::BadMagic("<checkpoint>".into()));
    }
    let mut r = Reader { bytes, at: 8 };
    let version = r.u32()? as u32;
    if version != VERSION {
        return Err(RailError::UnsupportedVersion(version));
    }
    let adapter = match r.u8()? {
        KIND_PRIMAL => {
            let lambda = r.f64()?;
            let targets = r.targets()?;
            let map = match r.u8()? {
                0 => FeatureMap::Identity { dim: r.u32()? },
                1 => {
                    let seed = r.u64()?;
                    let input_dim = r.u32()?;
                    let output_dim = r.u32()?;
                    let activation = match r.u8()? {
                        0 => Activation::Relu,
                        a => return Err(RailError::InvalidParameter(format!("bad activation {a}"))),
                    };
                    FeatureMap::Rhl(RhlParams::from_spec(RhlSpec {
                        seed,
                        input_dim,
                        output_dim,
                        activation,
                    })?)
                }
                t => return Err(RailError::InvalidParameter(format!("bad feature map tag {t}"))),
            };
            let learned_classes = r.classes()?;
            let weights = r.matrix()?;
            let memory = r.matrix()?;
            let class_texts = r.optional_matrix()?;
            AnyAdapter::Primal(PrimalState {
                weights,
                memory,
                lambda,
                map,
                learned_classes,
                targets,
                class_texts,
            })
        }
        KIND_DUAL => {
            let lambda = r.f64()?;
            let targets = r.targets()?;
            let kernel = match r.u8()? {
                0 => KernelSpec::Linear,
                1 => KernelSpec::Rbf { gamma: r.f64()? },
                t => return Err(RailError::InvalidParameter(format!("bad kernel tag {t}"))),
            };
            let learned_classes = r.classes()?;
            let prototypes = r.matrix()?;
            let label_matrix = r.matrix()?;
            let alpha = r.matrix()?;
            let gram = r.matrix()?;
            let class_texts = r.optional_matrix()?;
            AnyAdapter::Dual(DualState {
                gram,
                alpha,
                prototypes,
                label_matrix,
                lambda,
                kernel,
                learned_classes,
                targets,
                class_texts,
            })
        }
        k => return Err(RailError::InvalidParameter(format!("unknown checkpoint kind {k}"))),
    };
    if r.at != bytes.len() {
        return Err(RailError::DimensionMismatch("trailing bytes in checkpoint".into()));
    }
    Ok(adapter)
}

pub fn save(path: &Path, adapter: &AnyAdapter) -> Result<()> {
    fs::write(path, encode(adapter))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<AnyAdapter> {
    let bytes = fs::read(path)?;
    decode(&bytes).map_err(|e| e.in_file(path))
}
