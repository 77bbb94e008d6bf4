//! Task-incremental run with the domain of each test item known, next to the
//! task-agnostic run on the same data.
//!
//! cargo run --example mtil_protocol

use rail::eval::{compute_metrics, run_mtil, run_xtail, DomainSuite, RunConfig};
use rail::store::{synthesize_domains, SynthConfig};

fn main() -> rail::Result<()> {
    let mut sc = SynthConfig::new(4, 5, 24, 32, 0.8, 5);
    sc.noise = 0.5;
    sc.text_noise = 1.0;
    sc.text_alignment = 0.03;
    let suite = DomainSuite::from_synthetic(&synthesize_domains(&sc)?)?;
    let cfg = RunConfig {
        shots: 16,
        ..Default::default()
    };
    for (name, out) in [("mtil", run_mtil(&cfg, &suite)?), ("xtail", run_xtail(&cfg, &suite)?)] {
        let m = compute_metrics(&out.matrix)?;
        println!("{name}");
        print!("{}", out.matrix.to_csv());
        println!(
            "transfer {:.4}  average {:.4}  last {:.4}\n",
            m.transfer.unwrap_or(f64::NAN),
            m.average,
            m.last
        );
    }
    Ok(())
}
