//! Embedding files, datasets, the global label registry and fixtures.

mod dataset;
pub mod fewshot;
pub mod format;
mod registry;
pub mod synth;
mod texts;

pub use dataset::{EmbeddingDataset, Role};
pub use fewshot::sample_few_shot;
pub use format::{load_embeddings, save_embeddings, Manifest, ManifestRole};
pub use registry::{ClassEntry, DomainEntry, LabelRegistry};
pub use synth::{synthesize_domains, SynthConfig, SyntheticDomain, SyntheticSuite};
pub use texts::{
    load_text_table, render_prompt, save_text_table, DomainTexts, TextEmbeddingTable, DEFAULT_PROMPT,
};
