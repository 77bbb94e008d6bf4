//! Domain prototype correlations and in-domain accuracy, dual RBF adapter
//! against a plain linear classifier on correlated synthetic domains.
//!
//! cargo run --example prototype_diagnostics -- [seeds] [dim] [correlation] [gamma] [lambda] [noise]

use rail::eval::diagnostics::domain_prototype_diagnostics;
use rail::eval::DomainSuite;
use rail::store::{synthesize_domains, SynthConfig};
use rail::{Adapter, AdapterSpec, AnyAdapter, DomainBatch, FeatureMap, KernelSpec, TargetMode};

fn arg(i: usize, default: f64) -> f64 {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn train(spec: &AdapterSpec, suite: &DomainSuite) -> rail::Result<AnyAdapter> {
    let mut adapter: Option<AnyAdapter> = None;
    for dom in &suite.domains {
        let y = dom.train.global_labels(&suite.registry)?;
        let b = DomainBatch::new(&dom.train.features, &y, &dom.classes);
        match adapter.as_mut() {
            Some(a) => a.learn(&b)?,
            None => adapter = Some(spec.init(&b)?),
        }
    }
    Ok(adapter.expect("at least one domain"))
}

fn main() -> rail::Result<()> {
    let seeds = arg(1, 20.0) as u64;
    let dim = arg(2, 16.0) as usize;
    let correlation = arg(3, 0.3);
    let gamma = arg(4, 1.0);
    let lambda = arg(5, 1.0);
    let noise = arg(6, 0.8);
    let mut wins = 0;
    for seed in 0..seeds {
        let mut cfg = SynthConfig::new(4, 4, 16, dim, 0.6, seed);
        cfg.domain_correlation = correlation;
        cfg.noise = noise;
        let suite = DomainSuite::from_synthetic(&synthesize_domains(&cfg)?)?;
        let dual = train(
            &AdapterSpec::Dual {
                kernel: KernelSpec::rbf(gamma)?,
                lambda,
                targets: TargetMode::OneHot,
            },
            &suite,
        )?;
        let linear = train(
            &AdapterSpec::Primal {
                map: FeatureMap::Identity { dim },
                lambda,
                targets: TargetMode::OneHot,
            },
            &suite,
        )?;
        let d = domain_prototype_diagnostics(&dual, &suite)?;
        let l = domain_prototype_diagnostics(&linear, &suite)?;
        let ok = d.mean_off_diagonal_cc() <= l.mean_off_diagonal_cc()
            && d.mean_in_domain_accuracy() >= l.mean_in_domain_accuracy();
        wins += ok as usize;
        println!(
            "seed {seed:2}  cc dual {:+.3} linear {:+.3}  in-domain dual {:.3} linear {:.3}  {}",
            d.mean_off_diagonal_cc(),
            l.mean_off_diagonal_cc(),
            d.mean_in_domain_accuracy(),
            l.mean_in_domain_accuracy(),
            if ok { "ok" } else { "--" }
        );
    }
    println!("{wins}/{seeds} seeds follow the trend");
    Ok(())
}
