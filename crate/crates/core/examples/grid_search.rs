//! Hyperparameter selection on the first domain's few-shot split, and how
//! the chosen regularization follows the noise level of the data.
//!
//! cargo run --example grid_search

use rail::eval::{grid_search, AdapterKind, DomainSuite, RunConfig};
use rail::store::{synthesize_domains, SynthConfig};

fn main() -> rail::Result<()> {
    let cfg = RunConfig {
        adapter: AdapterKind::Dual,
        shots: 16,
        ..Default::default()
    };
    for noise in [0.05, 0.2, 0.5, 1.0, 2.0] {
        let mut sc = SynthConfig::new(2, 5, 16, 16, 0.8, 1);
        sc.noise = noise;
        let suite = DomainSuite::from_synthetic(&synthesize_domains(&sc)?)?;
        let out = grid_search(&cfg, &suite)?;
        println!(
            "noise {noise:<4}: lambda {:e}, gamma {:?} ({} grid points)",
            out.best.lambda,
            out.best.gamma,
            out.points.len()
        );
    }
    Ok(())
}
