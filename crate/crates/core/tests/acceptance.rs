//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::Instant;

use common::{dual_oracle, one_hot, primal_oracle, rbf_loop, rel, relu_project, Problem};
use rail::eval::diagnostics::domain_prototype_diagnostics;
use rail::eval::grid::standard_beta_grid;
use rail::eval::protocol::{few_shot_split, zero_shot_accuracy};
use rail::eval::{
    compute_metrics, grid_search, run_xtail, sweep_ablation, AdapterKind, DomainSuite, MetricMatrix, RunConfig,
    SweepAxis,
};
use rail::fusion::zero_shot_batch;
use rail::linalg::argmax;
use rail::store::{synthesize_domains, SynthConfig};
use rail::{
    classify_batch, kernel_matrix, Adapter, AdapterSpec, AnyAdapter, DomainBatch, DualState, FeatureMap,
    FusionConfig, KernelSpec, PrimalState, RhlParams, TargetMode,
};

type Verdict = Result<String, String>;

const SEEDS: u64 = 20;

fn check(cond: bool, detail: String) -> Verdict {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Seed-dependent split: 3 to 5 domains, 480 rows, dimension 64.
fn recursion_problem(seed: u64) -> (Problem, f64) {
    let domains = 3 + (seed % 3) as usize;
    let lambda = [1e-3, 1e-2, 1e-1, 1.0][(seed % 4) as usize];
    (Problem::random(seed, domains, 4, 480 / domains, 64), lambda)
}

fn primal_recursion() -> Verdict {
    let start = Instant::now();
    let (mut worst_w, mut worst_m) = (0.0f64, 0.0f64);
    for seed in 0..SEEDS {
        let (p, lambda) = recursion_problem(seed);
        let params = RhlParams::new(seed, 64, 256).map_err(|e| e.to_string())?;
        let map = FeatureMap::Rhl(params.clone());
        let mut state: Option<PrimalState> = None;
        for (x, y, c) in &p.splits {
            let b = DomainBatch::new(x, y, c);
            match state.as_mut() {
                Some(s) => s.learn(&b).map_err(|e| e.to_string())?,
                None => state = Some(PrimalState::init(&b, map.clone(), lambda, TargetMode::OneHot).map_err(|e| e.to_string())?),
            }
        }
        let state = state.unwrap();
        let (x, y, c) = p.pooled();
        let (w, m) = primal_oracle(&relu_project(&x, &params), &one_hot(&y, &c), lambda);
        worst_w = worst_w.max(rel(state.weights(), &w));
        worst_m = worst_m.max(rel(state.memory(), &m));
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst_w <= 1e-8 && worst_m <= 1e-8 && secs < 10.0,
        format!("{SEEDS} seeds, max rel err W {worst_w:.1e}, M {worst_m:.1e}, {secs:.2}s"),
    )
}

fn dual_recursion() -> Verdict {
    let start = Instant::now();
    let mut worst_alpha = 0.0f64;
    let mut worst_loop = 0.0f64;
    for seed in 0..SEEDS {
        let (p, lambda) = recursion_problem(seed);
        let kernel = KernelSpec::rbf(1.0 / 64.0).map_err(|e| e.to_string())?;
        let mut state: Option<DualState> = None;
        for (x, y, c) in &p.splits {
            let b = DomainBatch::new(x, y, c);
            match state.as_mut() {
                Some(s) => s.learn(&b).map_err(|e| e.to_string())?,
                None => state = Some(DualState::init(&b, kernel, lambda, TargetMode::OneHot).map_err(|e| e.to_string())?),
            }
        }
        let state = state.unwrap();
        let (x, y, c) = p.pooled();
        let pooled_k = kernel_matrix(&x, &x, &kernel).map_err(|e| e.to_string())?;
        if state.gram() != &pooled_k {
            return Err(format!("seed {seed}: recursive K differs from the pooled K"));
        }
        let labels = one_hot(&y, &c);
        if state.label_matrix() != &labels {
            return Err(format!("seed {seed}: recursive C differs from the block-diagonal C"));
        }
        if state.prototypes() != &x {
            return Err(format!("seed {seed}: memory rows differ from the pooled rows"));
        }
        let k = rbf_loop(&x, &x, 1.0 / 64.0);
        worst_loop = worst_loop.max(rel(state.gram(), &k));
        worst_alpha = worst_alpha.max(rel(state.alpha(), &dual_oracle(&k, &labels, lambda)));
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst_alpha <= 1e-8 && secs < 10.0,
        format!(
            "{SEEDS} seeds, K and C bit-equal to pooled, K vs loop {worst_loop:.1e}, max rel err alpha {worst_alpha:.1e}, {secs:.2}s"
        ),
    )
}

fn duality() -> Verdict {
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let p = Problem::random(500 + seed, 3, 4, 100, 24);
        let lambda = 0.05 * (seed + 1) as f64;
        let learn = |spec: AdapterSpec| -> rail::Result<AnyAdapter> {
            let mut a: Option<AnyAdapter> = None;
            for (x, y, c) in &p.splits {
                let b = DomainBatch::new(x, y, c);
                match a.as_mut() {
                    Some(s) => s.learn(&b)?,
                    None => a = Some(spec.init(&b)?),
                }
            }
            Ok(a.unwrap())
        };
        let primal = learn(AdapterSpec::Primal {
            map: FeatureMap::Identity { dim: 24 },
            lambda,
            targets: TargetMode::OneHot,
        })
        .map_err(|e| e.to_string())?;
        let dual = learn(AdapterSpec::Dual {
            kernel: KernelSpec::Linear,
            lambda,
            targets: TargetMode::OneHot,
        })
        .map_err(|e| e.to_string())?;
        let probe = Problem::random(900 + seed, 1, 1, 100, 24).splits.remove(0).0;
        let a = primal.predict(&probe).map_err(|e| e.to_string())?;
        let b = dual.predict(&probe).map_err(|e| e.to_string())?;
        worst = worst.max((a - b).amax());
    }
    check(worst <= 1e-6, format!("10 instances of 300 samples, max |primal - dual| {worst:.1e}"))
}

fn protocol_suite(seed: u64) -> DomainSuite {
    let mut sc = SynthConfig::new(4, 5, 24, 32, 0.8, seed);
    sc.noise = 0.5;
    sc.text_noise = 1.0;
    sc.text_alignment = 0.03;
    DomainSuite::from_synthetic(&synthesize_domains(&sc).expect("fixture")).expect("suite")
}

fn zero_shot_preservation() -> Verdict {
    let mut cells = 0;
    for seed in 0..5 {
        let suite = protocol_suite(seed);
        for adapter in [AdapterKind::Primal, AdapterKind::Dual] {
            let cfg = RunConfig {
                adapter,
                shots: 16,
                rhl_dim: 512,
                ..Default::default()
            };
            let out = run_xtail(&cfg, &suite).map_err(|e| e.to_string())?;
            for (j, dom) in suite.domains.iter().enumerate() {
                let zs = zero_shot_accuracy(&dom.test.features, &dom.test_labels, &suite.texts, cfg.fusion.logit_scale)
                    .map_err(|e| e.to_string())?;
                for i in 0..j {
                    if out.matrix.acc[i][j] != zs {
                        return Err(format!(
                            "seed {seed} {adapter:?}: step {} domain {} has {} vs zero-shot {zs}",
                            i + 1,
                            dom.name,
                            out.matrix.acc[i][j]
                        ));
                    }
                    cells += 1;
                }
            }
        }
    }
    Ok(format!("{cells} unlearned-domain cells equal isolated zero-shot accuracy exactly"))
}

fn metric_arithmetic() -> Verdict {
    let names = vec!["a".to_string(), "b".to_string(), "c".to_string()];
    let m = MetricMatrix::new(names, vec![vec![0.10, 0.20, 0.30], vec![0.40, 0.50, 0.60], vec![0.70, 0.80, 0.90]])
        .map_err(|e| e.to_string())?;
    let r = compute_metrics(&m).map_err(|e| e.to_string())?;
    let t = r.transfer.unwrap_or(f64::NAN);
    check(
        (t - 0.3667).abs() <= 1e-4 && (r.average - 0.5).abs() <= 1e-4 && (r.last - 0.8).abs() <= 1e-4,
        format!("transfer {t:.4}, average {:.4}, last {:.4}", r.average, r.last),
    )
}

fn diagnostics_trend() -> Verdict {
    let mut wins = 0;
    let mut lines = Vec::new();
    for seed in 0..SEEDS {
        let mut sc = SynthConfig::new(4, 4, 16, 16, 0.6, seed);
        sc.domain_correlation = 0.3;
        sc.noise = 0.8;
        let suite = DomainSuite::from_synthetic(&synthesize_domains(&sc).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let cfg = RunConfig {
            adapter: AdapterKind::Dual,
            shots: 16,
            ..Default::default()
        };
        let hyper = grid_search(&cfg, &suite).map_err(|e| e.to_string())?.best;
        let gamma = hyper.gamma.ok_or("grid search returned no gamma")?;
        let train = |spec: AdapterSpec| -> rail::Result<AnyAdapter> {
            let mut a: Option<AnyAdapter> = None;
            for k in 0..suite.domains.len() {
                let (x, y) = few_shot_split(&cfg, &suite, k)?;
                let b = DomainBatch::new(&x, &y, &suite.domains[k].classes);
                match a.as_mut() {
                    Some(s) => s.learn(&b)?,
                    None => a = Some(spec.init(&b)?),
                }
            }
            Ok(a.unwrap())
        };
        let dual = train(AdapterSpec::Dual {
            kernel: KernelSpec::rbf(gamma).map_err(|e| e.to_string())?,
            lambda: hyper.lambda,
            targets: TargetMode::OneHot,
        })
        .map_err(|e| e.to_string())?;
        let linear = train(AdapterSpec::Primal {
            map: FeatureMap::Identity { dim: 16 },
            lambda: hyper.lambda,
            targets: TargetMode::OneHot,
        })
        .map_err(|e| e.to_string())?;
        let d = domain_prototype_diagnostics(&dual, &suite).map_err(|e| e.to_string())?;
        let l = domain_prototype_diagnostics(&linear, &suite).map_err(|e| e.to_string())?;
        let ok = d.mean_off_diagonal_cc() <= l.mean_off_diagonal_cc()
            && d.mean_in_domain_accuracy() >= l.mean_in_domain_accuracy();
        wins += ok as usize;
        if !ok {
            lines.push(format!(
                "seed {seed}: cc {:.3}/{:.3} in-domain {:.3}/{:.3}",
                d.mean_off_diagonal_cc(),
                l.mean_off_diagonal_cc(),
                d.mean_in_domain_accuracy(),
                l.mean_in_domain_accuracy()
            ));
        }
    }
    let mut detail = format!("dual below linear on CC and above on in-domain accuracy in {wins}/{SEEDS} seeds");
    if !lines.is_empty() {
        detail.push_str(&format!(" ({})", lines.join("; ")));
    }
    check(wins >= 18, detail)
}

fn beta_sweep() -> Verdict {
    let suite = protocol_suite(3);
    let cfg = RunConfig {
        shots: 16,
        ..Default::default()
    };
    let rows = sweep_ablation(&cfg, &suite, SweepAxis::Beta, &standard_beta_grid()).map_err(|e| e.to_string())?;
    if rows.iter().any(|r| r.transfer != rows[0].transfer) {
        return Err("transfer differs across beta values".into());
    }
    if !rows.iter().any(|r| r.value == 0.8) {
        return Err("beta grid lacks 0.8".into());
    }

    let mut adapter: Option<AnyAdapter> = None;
    let mut registry = suite.registry.clone();
    let spec = AdapterSpec::Dual {
        kernel: KernelSpec::rbf(1.0).map_err(|e| e.to_string())?,
        lambda: 0.1,
        targets: TargetMode::OneHot,
    };
    let mut checked = 0;
    for k in 0..suite.domains.len() {
        let (x, y) = few_shot_split(&cfg, &suite, k).map_err(|e| e.to_string())?;
        let b = DomainBatch::new(&x, &y, &suite.domains[k].classes);
        match adapter.as_mut() {
            Some(a) => a.learn(&b).map_err(|e| e.to_string())?,
            None => adapter = Some(spec.init(&b).map_err(|e| e.to_string())?),
        }
        registry.mark_seen(&suite.domains[k].name).map_err(|e| e.to_string())?;
        let a = adapter.as_ref().unwrap();
        let learned = a.learned_classes().to_vec();
        for dom in &suite.domains {
            let zs = zero_shot_batch(&dom.test.features, &suite.texts, 100.0).map_err(|e| e.to_string())?;
            let logits = a.predict(&dom.test.features).map_err(|e| e.to_string())?;
            let expected = |beta: f64| -> Vec<usize> {
                (0..zs.nrows())
                    .map(|r| {
                        let z: Vec<f64> = zs.row(r).iter().copied().collect();
                        let top = argmax(&z).unwrap();
                        if !registry.is_seen(top) {
                            return top;
                        }
                        let scores: Vec<f64> = if beta == 0.0 {
                            logits.row(r).iter().copied().collect()
                        } else {
                            learned.iter().map(|&c| z[c]).collect()
                        };
                        learned[argmax(&scores).unwrap()]
                    })
                    .collect()
            };
            for beta in [0.0, 1.0] {
                let got = classify_batch(&dom.test.features, Some(a), &suite.texts, &registry, &FusionConfig::with_beta(beta))
                    .map_err(|e| e.to_string())?;
                if got != expected(beta) {
                    return Err(format!("beta {beta} at step {} on {} departs from the endpoint rule", k + 1, dom.name));
                }
                checked += got.len();
            }
        }
    }
    Ok(format!(
        "transfer {:.4} across {} beta values; {checked} endpoint predictions match adapter-only / zero-shot-slice",
        rows[0].transfer.unwrap_or(f64::NAN),
        rows.len()
    ))
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_rail");
    let root = dir.path().to_str().unwrap();
    let synth = Command::new(bin)
        .args(["synth", "--out", root, "--domains", "3", "--classes", "4", "--dim", "16", "--seed", "5"])
        .output()
        .map_err(|e| e.to_string())?;
    if !synth.status.success() {
        return Err(String::from_utf8_lossy(&synth.stderr).into_owned());
    }
    let order = String::from_utf8_lossy(&synth.stdout).trim().to_string();
    let mut outputs = Vec::new();
    for name in ["first.json", "second.json"] {
        let out = dir.path().join(name);
        let run = Command::new(bin)
            .args(["train-eval", "--order", &order, "--shots", "8", "--seed", "3", "--out", out.to_str().unwrap()])
            .output()
            .map_err(|e| e.to_string())?;
        if !run.status.success() {
            return Err(String::from_utf8_lossy(&run.stderr).into_owned());
        }
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    check(
        outputs[0] == outputs[1],
        format!("two train-eval runs wrote {} and {} bytes, identical: {}", outputs[0].len(), outputs[1].len(), outputs[0] == outputs[1]),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("primal recursion equals pooled ridge", primal_recursion),
        ("dual recursion equals pooled kernel ridge", dual_recursion),
        ("linear dual equals primal", duality),
        ("zero-shot preserved on unlearned domains", zero_shot_preservation),
        ("metric arithmetic", metric_arithmetic),
        ("prototype diagnostics trend", diagnostics_trend),
        ("beta sweep structure", beta_sweep),
        ("train-eval determinism", determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let verdict = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match verdict {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
