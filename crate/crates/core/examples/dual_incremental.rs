//! Dual (kernel) adapter: the Gram matrix grows along its diagonal and the
//! stored prototypes are the raw training embeddings.
//!
//! cargo run --example dual_incremental

use rail::eval::DomainSuite;
use rail::linalg::relative_frobenius;
use rail::store::{synthesize_domains, SynthConfig};
use rail::{kernel_matrix, Adapter, DomainBatch, DualState, KernelSpec, TargetMode};

fn main() -> rail::Result<()> {
    let synth = synthesize_domains(&SynthConfig::new(3, 4, 10, 16, 0.8, 3))?;
    let suite = DomainSuite::from_synthetic(&synth)?;
    let kernel = KernelSpec::rbf(1.0)?;

    let mut state: Option<DualState> = None;
    for dom in &suite.domains {
        let y = dom.train.global_labels(&suite.registry)?;
        let batch = DomainBatch::new(&dom.train.features, &y, &dom.classes);
        match state.as_mut() {
            Some(s) => s.learn(&batch)?,
            None => state = Some(DualState::init(&batch, kernel, 0.1, TargetMode::OneHot)?),
        }
        let s = state.as_ref().unwrap();
        println!(
            "learned {}: {} stored prototypes, alpha {}x{}",
            dom.name,
            s.memory_rows(),
            s.alpha().nrows(),
            s.alpha().ncols()
        );
    }
    let state = state.unwrap();

    let direct = kernel_matrix(state.prototypes(), state.prototypes(), &kernel)?;
    println!(
        "block-built Gram vs direct evaluation: {:.2e}",
        relative_frobenius(state.gram(), &direct)
    );
    for dom in &suite.domains {
        let scores = state.predict(&dom.test.features)?;
        let hits = scores
            .row_iter()
            .zip(&dom.test_labels)
            .filter(|(row, &l)| {
                let v: Vec<f64> = row.iter().copied().collect();
                rail::linalg::argmax(&v).map(|k| state.learned_classes()[k]) == Some(l)
            })
            .count();
        println!("{}: adapter-only accuracy {:.3}", dom.name, hits as f64 / dom.test_labels.len() as f64);
    }
    Ok(())
}
