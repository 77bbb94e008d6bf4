mod common;

use rail::eval::protocol::{adapter_spec, few_shot_split, zero_shot_accuracy, Hyperparams};
use rail::eval::{grid_search, run_mtil, run_xtail, AdapterKind, DomainSuite, RunConfig};
use rail::linalg::argmax;
use rail::store::{synthesize_domains, SynthConfig};
use rail::{Adapter, AnyAdapter, DomainBatch, Matrix, TargetMode};

fn fixed(adapter: AdapterKind) -> RunConfig {
    RunConfig {
        adapter,
        shots: 16,
        lambda: Some(0.1),
        gamma: Some(1.0),
        rhl_dim: 256,
        ..Default::default()
    }
}

fn separated(seed: u64) -> DomainSuite {
    let mut sc = SynthConfig::new(3, 5, 24, 32, 0.9, seed);
    sc.noise = 0.1;
    sc.text_noise = 0.5;
    sc.text_alignment = 0.03;
    DomainSuite::from_synthetic(&synthesize_domains(&sc).unwrap()).unwrap()
}

#[test]
fn upper_triangle_equals_isolated_zero_shot() {
    for seed in 0..3 {
        let suite = common::suite(4, seed);
        for kind in [AdapterKind::Primal, AdapterKind::Dual] {
            for targets in [TargetMode::OneHot, TargetMode::TextEmbedding] {
                let cfg = RunConfig { targets, ..fixed(kind) };
                let out = run_xtail(&cfg, &suite).unwrap();
                for (j, dom) in suite.domains.iter().enumerate() {
                    let zs = zero_shot_accuracy(&dom.test.features, &dom.test_labels, &suite.texts, 100.0).unwrap();
                    for i in 0..j {
                        assert_eq!(out.matrix.acc[i][j], zs, "seed {seed} {kind:?} {targets:?} ({i},{j})");
                    }
                }
            }
        }
    }
}

#[test]
fn well_separated_domains_are_learned() {
    for seed in 0..3 {
        let suite = separated(seed);
        for kind in [AdapterKind::Primal, AdapterKind::Dual] {
            let out = run_xtail(&fixed(kind), &suite).unwrap();
            for i in 0..3 {
                for j in 0..=i {
                    assert!(out.matrix.acc[i][j] >= 0.95, "seed {seed} {kind:?} ({i},{j}) = {}", out.matrix.acc[i][j]);
                }
            }
        }
    }
}

#[test]
fn mtil_is_at_least_xtail_after_learning() {
    for seed in 0..3 {
        let suite = separated(seed);
        let cfg = fixed(AdapterKind::Dual);
        let x = run_xtail(&cfg, &suite).unwrap();
        let m = run_mtil(&cfg, &suite).unwrap();
        for i in 0..3 {
            for j in 0..=i {
                assert!(m.matrix.acc[i][j] >= x.matrix.acc[i][j], "seed {seed} ({i},{j})");
            }
        }
    }
}

#[test]
fn single_domain_mtil_and_xtail_agree_when_zero_shot_is_confined() {
    let suite = separated(7);
    let one = DomainSuite::new(
        vec![(
            suite.domains[0].train.clone(),
            suite.domains[0].test.clone(),
            rail::store::DomainTexts {
                domain_name: suite.domains[0].name.clone(),
                class_names: suite.domains[0].train.class_names.clone(),
                vectors: suite.texts.rows(&suite.domains[0].classes),
                prompt_template: suite.texts.prompt_template().to_string(),
            },
        )],
        false,
    )
    .unwrap();
    let cfg = fixed(AdapterKind::Dual);
    let x = run_xtail(&cfg, &one).unwrap();
    let m = run_mtil(&cfg, &one).unwrap();
    assert_eq!(x.matrix.acc.len(), 1);
    assert_eq!(x.matrix.acc, m.matrix.acc);
}

#[test]
fn selected_lambda_shrinks_with_noise() {
    let cfg = RunConfig {
        shots: 16,
        gamma: Some(1.0),
        ..Default::default()
    };
    for seed in 0..8 {
        let mut chosen = Vec::new();
        for noise in [2.0, 0.5, 0.05] {
            let mut sc = SynthConfig::new(2, 5, 16, 16, 0.8, seed);
            sc.noise = noise;
            let suite = DomainSuite::from_synthetic(&synthesize_domains(&sc).unwrap()).unwrap();
            chosen.push(grid_search(&cfg, &suite).unwrap().best.lambda);
        }
        assert!(chosen.windows(2).all(|w| w[1] <= w[0]), "seed {seed}: {chosen:?}");
        assert!(chosen[2] < chosen[0], "seed {seed}: {chosen:?}");
    }
}

#[test]
fn repeated_runs_are_bit_identical() {
    let suite = common::suite(3, 5);
    let cfg = RunConfig {
        shots: 8,
        ..Default::default()
    };
    let a = run_xtail(&cfg, &suite).unwrap();
    let b = run_xtail(&cfg, &suite).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

/// Restricted to a learned domain's classes, the incremental adapter ranks
/// exactly like a fit on every domain seen so far.
#[test]
fn restricted_predictions_match_joint_fit_at_every_step() {
    let suite = common::suite(4, 2);
    for kind in [AdapterKind::Primal, AdapterKind::Dual] {
        let cfg = fixed(kind);
        let spec = adapter_spec(&cfg, &Hyperparams { lambda: 0.1, gamma: Some(1.0) }, suite.dim()).unwrap();
        let shots: Vec<(Matrix, Vec<usize>)> = (0..4).map(|k| few_shot_split(&cfg, &suite, k).unwrap()).collect();
        let mut adapter: Option<AnyAdapter> = None;
        for step in 0..4 {
            let dom = &suite.domains[step];
            let b = DomainBatch::new(&shots[step].0, &shots[step].1, &dom.classes);
            match adapter.as_mut() {
                Some(a) => a.learn(&b).unwrap(),
                None => adapter = Some(spec.init(&b).unwrap()),
            }
            let rows: Vec<_> = shots[..=step].iter().flat_map(|(x, _)| x.row_iter().map(|r| r.clone_owned()).collect::<Vec<_>>()).collect();
            let x = Matrix::from_rows(&rows);
            let y: Vec<usize> = shots[..=step].iter().flat_map(|(_, y)| y.clone()).collect();
            let c: Vec<usize> = suite.domains[..=step].iter().flat_map(|d| d.classes.clone()).collect();
            let joint = spec.init(&DomainBatch::new(&x, &y, &c)).unwrap();
            let inc = adapter.as_ref().unwrap();
            for dom in &suite.domains[..=step] {
                let cols: Vec<usize> = dom.classes.iter().map(|cl| c.iter().position(|v| v == cl).unwrap()).collect();
                let a = inc.predict(&dom.test.features).unwrap();
                let b = joint.predict(&dom.test.features).unwrap();
                assert!((&a - &b).amax() < 1e-8);
                for r in 0..a.nrows() {
                    let ra: Vec<f64> = cols.iter().map(|&k| a[(r, k)]).collect();
                    let rb: Vec<f64> = cols.iter().map(|&k| b[(r, k)]).collect();
                    assert_eq!(argmax(&ra), argmax(&rb));
                }
            }
        }
    }
}
