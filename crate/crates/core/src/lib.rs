//! Recursive ridge-regression adapters for learning a sequence of domains on
//! top of frozen embeddings.
//!
//! Both adapters reach exactly the solution of ridge regression on all data
//! seen so far, without keeping old data around (primal form) or keeping
//! only the raw training embeddings (dual form). A training-free gate routes
//! test items through the adapter only when the zero-shot prediction points
//! at an already-learned class, so zero-shot behaviour on unseen domains is
//! untouched.

pub mod adapter;
pub mod checkpoint;
pub mod dual;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod linalg;
pub mod primal;
pub mod projection;
pub mod store;

pub use adapter::{Adapter, AdapterSpec, AnyAdapter, DomainBatch, TargetMode};
pub use dual::DualState;
pub use error::{RailError, Result};
pub use fusion::{classify, classify_batch, fuse, gate, zero_shot_logits, FusionConfig, Gate};
pub use linalg::Matrix;
pub use primal::PrimalState;
pub use projection::{kernel_matrix, rhl_project, FeatureMap, KernelSpec, RhlParams, RhlSpec};
