//! Primal adapter learning three domains one at a time, compared with a
//! single fit on the pooled data.
//!
//! cargo run --example primal_incremental

use rail::linalg::relative_frobenius;
use rail::store::{synthesize_domains, SynthConfig};
use rail::eval::DomainSuite;
use rail::{Adapter, DomainBatch, FeatureMap, Matrix, PrimalState, RhlParams, TargetMode};

fn main() -> rail::Result<()> {
    let synth = synthesize_domains(&SynthConfig::new(3, 5, 20, 32, 0.8, 7))?;
    let suite = DomainSuite::from_synthetic(&synth)?;
    let map = FeatureMap::Rhl(RhlParams::new(7, 32, 256)?);
    let lambda = 0.1;

    let mut state: Option<PrimalState> = None;
    let (mut all_x, mut all_y, mut all_c) = (Vec::new(), Vec::new(), Vec::new());
    for dom in &suite.domains {
        let y = dom.train.global_labels(&suite.registry)?;
        let batch = DomainBatch::new(&dom.train.features, &y, &dom.classes);
        match state.as_mut() {
            Some(s) => s.learn(&batch)?,
            None => state = Some(PrimalState::init(&batch, map.clone(), lambda, TargetMode::OneHot)?),
        }
        let s = state.as_ref().unwrap();
        println!(
            "learned {}: W is {}x{}, memory {}x{}",
            dom.name,
            s.weights().nrows(),
            s.weights().ncols(),
            s.memory().nrows(),
            s.memory().ncols()
        );
        all_x.extend(dom.train.features.row_iter().map(|r| r.clone_owned()));
        all_y.extend(y);
        all_c.extend(dom.classes.iter().copied());
    }
    let state = state.unwrap();

    let pooled_x = Matrix::from_rows(&all_x);
    let pooled = PrimalState::init(&DomainBatch::new(&pooled_x, &all_y, &all_c), map, lambda, TargetMode::OneHot)?;
    println!(
        "relative Frobenius gap to the pooled fit: W {:.2e}, memory {:.2e}",
        relative_frobenius(state.weights(), pooled.weights()),
        relative_frobenius(state.memory(), pooled.memory())
    );

    let dom = &suite.domains[0];
    let scores = state.predict(&dom.test.features)?;
    let hits = scores
        .row_iter()
        .zip(&dom.test_labels)
        .filter(|(row, &l)| {
            let v: Vec<f64> = row.iter().copied().collect();
            rail::linalg::argmax(&v).map(|k| state.learned_classes()[k]) == Some(l)
        })
        .count();
    println!("adapter-only accuracy on {}: {:.3}", dom.name, hits as f64 / dom.test_labels.len() as f64);
    Ok(())
}
