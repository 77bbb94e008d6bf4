//! Full cross-domain task-agnostic run on synthetic domains: the accuracy
//! matrix, its metrics and the zero-shot row the upper triangle must match.
//!
//! cargo run --example xtail_protocol -- [primal|dual]

use rail::eval::{compute_metrics, run_xtail, AdapterKind, DomainSuite, RunConfig};
use rail::store::{synthesize_domains, SynthConfig};

fn main() -> rail::Result<()> {
    let adapter = match std::env::args().nth(1).as_deref() {
        Some("primal") => AdapterKind::Primal,
        _ => AdapterKind::Dual,
    };
    let mut sc = SynthConfig::new(4, 5, 24, 32, 0.8, 11);
    sc.noise = 0.5;
    sc.text_noise = 1.0;
    sc.text_alignment = 0.03;
    let suite = DomainSuite::from_synthetic(&synthesize_domains(&sc)?)?;
    let cfg = RunConfig {
        adapter,
        shots: 16,
        rhl_dim: 512,
        ..Default::default()
    };
    let out = run_xtail(&cfg, &suite)?;
    println!("{adapter:?} adapter, lambda {} gamma {:?}", out.hyperparams.lambda, out.hyperparams.gamma);
    print!("{}", out.matrix.to_csv());
    println!("zero-shot: {:?}", out.zero_shot);
    let m = compute_metrics(&out.matrix)?;
    println!(
        "transfer {:.4}  average {:.4}  last {:.4}",
        m.transfer.unwrap_or(f64::NAN),
        m.average,
        m.last
    );
    Ok(())
}
