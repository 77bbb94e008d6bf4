//! Embedding files, text tables and adapter checkpoints on disk.
//!
//! cargo run --example embedding_files -- [output-dir]

use std::path::PathBuf;

use rail::checkpoint;
use rail::eval::{read_order_file, write_synthetic, DomainSuite};
use rail::store::{load_embeddings, synthesize_domains, SynthConfig};
use rail::{Adapter, AdapterSpec, AnyAdapter, DomainBatch, KernelSpec, TargetMode};

fn main() -> rail::Result<()> {
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("rail-embedding-files"));
    let synth = synthesize_domains(&SynthConfig::new(2, 3, 8, 16, 0.8, 4))?;
    let order = write_synthetic(&synth, &root)?;
    println!("wrote {}", order.display());

    let dirs = read_order_file(&order)?;
    let train = load_embeddings(&dirs[0].join("train.emb"))?;
    println!(
        "{}: {} rows of dim {}, classes {:?}",
        train.domain_name,
        train.n_samples(),
        train.dim(),
        train.class_names
    );

    let suite = DomainSuite::load(&dirs, true)?;
    let spec = AdapterSpec::Dual {
        kernel: KernelSpec::rbf(1.0)?,
        lambda: 0.1,
        targets: TargetMode::OneHot,
    };
    let dom = &suite.domains[0];
    let y = dom.train.global_labels(&suite.registry)?;
    let adapter = spec.init(&DomainBatch::new(&dom.train.features, &y, &dom.classes))?;

    let path = root.join("adapter.ckpt");
    checkpoint::save(&path, &adapter)?;
    let restored: AnyAdapter = checkpoint::load(&path)?;
    let same = restored.predict(&dom.test.features)? == adapter.predict(&dom.test.features)?;
    println!("checkpoint {} restores identical predictions: {same}", path.display());
    Ok(())
}
