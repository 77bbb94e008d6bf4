//! The gate and the fusion rule on a hand-built three-class problem.
//!
//! cargo run --example zero_shot_fusion

use rail::store::LabelRegistry;
use rail::store::TextEmbeddingTable;
use rail::{classify, fuse, gate, zero_shot_logits, DomainBatch, FeatureMap, FusionConfig, Matrix, PrimalState, TargetMode};

fn main() -> rail::Result<()> {
    let mut registry = LabelRegistry::new(3)?;
    registry.register_domain("animals", &["cat", "dog"])?;
    registry.register_domain("vehicles", &["car"])?;
    let texts = TextEmbeddingTable::new(Matrix::identity(3, 3), "A photo of a {}.")?;

    let image = [0.9, 0.3, 0.1];
    let zs = zero_shot_logits(&image, &texts, 1.0)?;
    println!("zero-shot probabilities at scale 1: {zs:.4?}");
    println!("gate before learning: {:?}", gate(&zs, &registry)?);

    let x = Matrix::from_row_slice(4, 3, &[1.0, 0.1, 0.0, 0.9, 0.0, 0.1, 0.1, 1.0, 0.0, 0.0, 0.9, 0.1]);
    let labels = [0, 0, 1, 1];
    let classes = [0, 1];
    let adapter = PrimalState::init(
        &DomainBatch::new(&x, &labels, &classes),
        FeatureMap::Identity { dim: 3 },
        0.1,
        TargetMode::OneHot,
    )?;
    registry.mark_seen("animals")?;
    println!("gate after learning animals: {:?}", gate(&zs, &registry)?);

    let logits = adapter.predict(&Matrix::from_row_slice(1, 3, &image))?;
    let logits: Vec<f64> = logits.iter().copied().collect();
    for beta in [0.0, 0.5, 0.8, 1.0] {
        let fused = fuse(&logits, &zs, adapter.learned_classes(), &FusionConfig::with_beta(beta))?;
        println!("beta {beta}: fused {fused:.4?}");
    }

    let cfg = FusionConfig::default();
    for (name, img) in [("cat-like", [0.9, 0.3, 0.1]), ("car-like", [0.1, 0.2, 0.95])] {
        let class = classify(&img, Some(&adapter), &texts, &registry, &cfg)?;
        println!("{name} image -> {}", registry.class_name(class).unwrap_or("?"));
    }
    Ok(())
}
