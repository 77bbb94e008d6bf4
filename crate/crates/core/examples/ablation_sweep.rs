//! Fusion-ratio and RHL-dimension sweeps, printed as CSV.
//!
//! cargo run --example ablation_sweep

use rail::eval::grid::standard_beta_grid;
use rail::eval::sweep::sweep_csv;
use rail::eval::{sweep_ablation, AdapterKind, DomainSuite, RunConfig, SweepAxis};
use rail::store::{synthesize_domains, SynthConfig};

fn main() -> rail::Result<()> {
    let mut sc = SynthConfig::new(3, 5, 24, 32, 0.8, 2);
    sc.noise = 0.5;
    sc.text_noise = 1.0;
    sc.text_alignment = 0.03;
    let suite = DomainSuite::from_synthetic(&synthesize_domains(&sc)?)?;

    let dual = RunConfig {
        shots: 16,
        ..Default::default()
    };
    let rows = sweep_ablation(&dual, &suite, SweepAxis::Beta, &standard_beta_grid())?;
    print!("{}", sweep_csv(SweepAxis::Beta, &rows));

    let primal = RunConfig {
        adapter: AdapterKind::Primal,
        shots: 16,
        lambda: Some(0.1),
        ..Default::default()
    };
    let rows = sweep_ablation(&primal, &suite, SweepAxis::RhlDim, &[64.0, 256.0, 1024.0])?;
    print!("\n{}", sweep_csv(SweepAxis::RhlDim, &rows));
    Ok(())
}
