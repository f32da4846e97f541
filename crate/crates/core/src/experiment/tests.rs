use proptest::prelude::*;

use super::*;
use crate::datastore::stratified_split;
use crate::model::ModelShape;
use crate::numerics::DenseMatrix;
use crate::selection::Strategy;

fn small_config() -> ExperimentConfig {
    ExperimentConfig {
        rounds: 3,
        seeds: vec![0, 1],
        n_per_class: 60,
        num_classes: 3,
        dim: 8,
        context_len: 4,
        adapter_rank: 4,
        epochs: 3,
        budget_fraction: 0.02,
        initial_per_class: 4,
        confident_per_class: 4,
        ..ExperimentConfig::default()
    }
}

fn run(cfg: &ExperimentConfig) -> ExperimentResult {
    let ds = cfg.generate_dataset().unwrap();
    run_experiment(cfg, &ds, None).unwrap()
}

#[test]
fn round_budget_is_a_ceiling() {
    assert_eq!(round_budget(0.01, 800), 8);
    assert_eq!(round_budget(0.01, 801), 9);
    assert_eq!(round_budget(0.01, 1), 1);
    assert_eq!(round_budget(1.0, 5), 5);
}

#[test]
fn separable_toy_scores_perfectly() {
    // Two classes on opposite poles, anchors on the poles.
    let features = DenseMatrix::from_rows(&[
        vec![1.0, 0.0],
        vec![0.8, 0.6],
        vec![-1.0, 0.0],
        vec![-0.6, -0.8],
    ])
    .unwrap();
    let anchors = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
    let ds = FeatureDataset::new(
        features,
        vec![0, 0, 1, 1],
        anchors.clone(),
        vec!["a".into(), "b".into()],
    )
    .unwrap();
    let shape = ModelShape {
        num_classes: 2,
        dim: 2,
        context_len: 1,
        adapter_rank: 1,
        adapter_enabled: false,
        shared_ctx: false,
    };
    let state = ModelState::zero_context(shape, &anchors).unwrap();
    assert_eq!(evaluate_accuracy(&state, &ds, &[0, 1, 2, 3]).unwrap(), 1.0);
    assert_eq!(evaluate_accuracy(&state, &ds, &[0, 2]).unwrap(), 1.0);
    assert!(matches!(
        evaluate_accuracy(&state, &ds, &[]),
        Err(Error::EmptyTestSet)
    ));
}

#[test]
fn uninformative_model_is_at_chance() {
    // Labels are drawn independently of the features, so any fixed
    // classifier is right with probability 1/C.
    let (n, d, c) = (4000, 8, 4);
    let mut g = RngStream::new(3);
    let rows: Vec<Vec<f32>> = (0..n)
        .map(|_| (0..d).map(|_| g.normal() as f32).collect())
        .collect();
    let labels: Vec<u32> = (0..n).map(|i| (i % c) as u32).collect();
    let mut features = DenseMatrix::from_rows(&rows).unwrap();
    features.normalize_rows().unwrap();
    let mut anchors = DenseMatrix::from_rows(
        &(0..c)
            .map(|_| (0..d).map(|_| g.normal() as f32).collect())
            .collect::<Vec<_>>(),
    )
    .unwrap();
    anchors.normalize_rows().unwrap();
    let names = (0..c).map(|k| k.to_string()).collect();
    let ds = FeatureDataset::new(features, labels, anchors.clone(), names).unwrap();
    let shape = ModelShape {
        num_classes: c,
        dim: d,
        context_len: 2,
        adapter_rank: 2,
        adapter_enabled: true,
        shared_ctx: false,
    };
    let state = ModelState::init(shape, &anchors, &RngStream::new(4)).unwrap();
    let all: Vec<usize> = (0..n).collect();
    let acc = evaluate_accuracy(&state, &ds, &all).unwrap();
    let sd = (0.25f64 * 0.75 / n as f64).sqrt();
    assert!((acc - 0.25).abs() < 4.0 * sd, "accuracy {acc}");
}

#[test]
fn zero_shot_accuracy_equals_nearest_anchor() {
    let cfg = small_config();
    let ds = cfg.generate_dataset().unwrap();
    let result = run_seed(&cfg, &ds, 1).unwrap();
    let split =
        stratified_split(&ds, cfg.test_fraction, &run_rng(cfg.seed, 1).child("split")).unwrap();
    assert_eq!(
        result.zero_shot_accuracy,
        ds.nearest_anchor_accuracy(&split.test)
    );
    assert_eq!(result.test_size, split.test.len());
    assert_eq!(result.pool_size, split.pool.len());
}

#[test]
fn budget_accounting_holds_per_round() {
    let cfg = small_config();
    let result = run(&cfg);
    for run in &result.runs {
        let b = round_budget(cfg.budget_fraction, run.pool_size);
        assert_eq!(run.budget, b);
        assert_eq!(run.rounds.len(), cfg.rounds + 1);
        for (r, report) in run.rounds.iter().enumerate() {
            assert_eq!(report.round, r);
            assert_eq!(report.n_labeled, r * b);
            let expected = if r < cfg.rounds { b } else { 0 };
            assert_eq!(report.selected.len(), expected);
            assert!((0.0..=1.0).contains(&report.accuracy));
        }
        assert_eq!(run.final_labeled, cfg.rounds * b);
        assert_eq!(run.oracle_queries, cfg.rounds * b);
    }
}

#[test]
fn selections_are_fresh_and_mined_sets_exclude_them() {
    for strategy in Strategy::ALL {
        let cfg = ExperimentConfig {
            strategy,
            seeds: vec![2],
            ..small_config()
        };
        let run = &run(&cfg).runs[0];
        let mut seen = std::collections::BTreeSet::new();
        for report in &run.rounds {
            for &i in &report.selected {
                assert!(seen.insert(i), "{strategy}: {i} queried twice");
            }
            assert!(report.mined.iter().all(|i| !seen.contains(i)), "{strategy}");
            assert_eq!(report.strategy, strategy);
        }
        assert_eq!(seen.len(), run.oracle_queries);
    }
}

#[test]
fn round_zero_trains_on_zero_shot_pseudo_labels() {
    let cfg = small_config();
    let ds = cfg.generate_dataset().unwrap();
    let run = run_seed(&cfg, &ds, 0).unwrap();
    let split =
        stratified_split(&ds, cfg.test_fraction, &run_rng(cfg.seed, 0).child("split")).unwrap();
    let initial = zero_shot_init(&ds, &split.pool, cfg.initial_per_class, cfg.tau).unwrap();
    let idx: Vec<usize> = initial.iter().map(|p| p.0).collect();
    let truth = ds.labels_for_evaluation(&idx);
    let hits = initial
        .iter()
        .zip(&truth)
        .filter(|((_, y), t)| y == *t)
        .count();
    let r0 = &run.rounds[0];
    assert_eq!(r0.n_labeled, 0);
    assert_eq!(r0.n_pseudo, initial.len());
    assert_eq!(
        r0.pseudo_precision,
        Some(hits as f64 / initial.len() as f64)
    );
}

#[test]
fn pool_exhaustion_labels_everything_then_stops() {
    let cfg = ExperimentConfig {
        rounds: 10,
        budget_fraction: 0.3,
        n_per_class: 5,
        seeds: vec![0],
        ..small_config()
    };
    let run = &run(&cfg).runs[0];
    assert_eq!(run.final_labeled, run.pool_size);
    assert_eq!(run.oracle_queries, run.pool_size);
    let last = run.rounds.last().unwrap();
    assert!(last.selected.is_empty());
    assert_eq!(last.n_labeled, run.pool_size);
    assert!(run.rounds.len() < cfg.rounds + 1);
}

#[test]
fn querying_an_empty_pool_is_an_error() {
    let cfg = small_config();
    let ds = cfg.generate_dataset().unwrap();
    let all: Vec<usize> = (0..ds.num_samples()).collect();
    let mut oracle = AnnotationOracle::new(&ds);
    let pool = PoolState::new(all.iter().copied());
    let labels = oracle.annotate(&pool, &all).unwrap();
    let pool = pool.commit_round(&labels, &[]).unwrap();
    let ctx = RunContext {
        dataset: &ds,
        config: &cfg,
        test: &all,
        budget: 1,
        seed: 0,
        rng: run_rng(0, 0),
    };
    assert!(matches!(
        run_round(&ctx, 1, &pool, &mut oracle, true),
        Err(Error::PoolExhausted)
    ));
    assert!(run_round(&ctx, 1, &pool, &mut oracle, false).is_ok());
}

#[test]
fn rounds_start_from_a_fresh_init() {
    let base = ExperimentConfig {
        save_checkpoints: true,
        ..small_config()
    };
    let ds = base.generate_dataset().unwrap();
    let ours = run_seed(&base, &ds, 0).unwrap();
    let random = run_seed(
        &ExperimentConfig {
            strategy: Strategy::Random,
            ..base.clone()
        },
        &ds,
        0,
    )
    .unwrap();
    assert_eq!(ours.init_checkpoints.len(), base.rounds + 1);
    for (r, bytes) in ours.init_checkpoints.iter().enumerate() {
        let fresh = initial_model(&base, &ds, 0, r)
            .unwrap()
            .to_checkpoint_bytes();
        assert_eq!(bytes, &fresh, "round {r}");
        assert_eq!(bytes, &random.init_checkpoints[r], "round {r}");
    }
    assert_ne!(ours.init_checkpoints[0], ours.init_checkpoints[1]);
    assert_ne!(ours.rounds[1].selected, random.rounds[1].selected);
}

#[test]
fn reports_are_deterministic() {
    let cfg = small_config();
    let (a, b) = (run(&cfg), run(&cfg));
    assert_eq!(csv_report(&a), csv_report(&b));
    assert_eq!(json_summary(&a).to_string(), json_summary(&b).to_string());
    let ds = cfg.generate_dataset().unwrap();
    let par = run_experiment(&cfg, &ds, Some(2)).unwrap();
    assert_eq!(csv_report(&a), csv_report(&par));
    assert!(csv_report(&a).contains(",0\n"));
}

#[test]
fn single_seed_has_zero_std() {
    let cfg = ExperimentConfig {
        seeds: vec![4],
        ..small_config()
    };
    let result = run(&cfg);
    assert!(result
        .summary
        .iter()
        .all(|s| s.accuracy_std == 0.0 && s.runs == 1));
    for (s, r) in result.summary.iter().zip(&result.runs[0].rounds) {
        assert_eq!(s.accuracy_mean, r.accuracy);
    }
}

#[test]
fn permuting_seeds_permutes_rows_only() {
    let cfg = ExperimentConfig {
        seeds: vec![0, 1, 2],
        rounds: 2,
        ..small_config()
    };
    let forward = run(&cfg);
    let backward = run(&ExperimentConfig {
        seeds: vec![2, 1, 0],
        ..cfg.clone()
    });
    assert_eq!(forward.summary, backward.summary);
    for (a, b) in forward.runs.iter().zip(backward.runs.iter().rev()) {
        assert_eq!(a, b);
    }
}

#[test]
fn summary_matches_direct_statistics() {
    let cfg = ExperimentConfig {
        seeds: vec![0, 1, 2],
        rounds: 1,
        ..small_config()
    };
    let result = run(&cfg);
    for s in &result.summary {
        let acc: Vec<f64> = result
            .runs
            .iter()
            .map(|r| r.rounds[s.round].accuracy)
            .collect();
        let m = acc.iter().sum::<f64>() / 3.0;
        let var = acc.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / 2.0;
        assert!((s.accuracy_mean - m).abs() < 1e-12);
        assert!((s.accuracy_std - var.sqrt()).abs() < 1e-12);
    }
}

#[test]
fn csv_has_one_row_per_round() {
    let cfg = small_config();
    let result = run(&cfg);
    let csv = csv_report(&result);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), cfg.seeds.len() * (cfg.rounds + 1));
    assert!(rows.iter().all(|r| r.split(',').count() == 9));
    assert!(rows[0].starts_with("0,0,ours,"));
}

#[test]
fn reports_are_written_with_strategy_and_seed_in_names() {
    let cfg = ExperimentConfig {
        seed: 17,
        strategy: Strategy::Margin,
        save_checkpoints: true,
        seeds: vec![3],
        rounds: 1,
        ..small_config()
    };
    let result = run(&cfg);
    let dir = tempfile::tempdir().unwrap();
    let written = write_reports(&result, dir.path()).unwrap();
    let names: Vec<String> = written
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(
        names,
        vec![
            "margin_seed17.csv",
            "margin_seed17.summary.json",
            "margin_seed17_run3_round0_init.dpms",
            "margin_seed17_run3_round1_init.dpms",
        ]
    );
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&written[1]).unwrap()).unwrap();
    let echoed: ExperimentConfig = serde_json::from_value(summary["config"].clone()).unwrap();
    assert_eq!(echoed, cfg);
}

/// Brute force: fraction of (positive, negative) pairs ordered correctly,
/// ties counting one half.
fn auroc_pairs(pos: &[f64], neg: &[f64]) -> f64 {
    let mut wins = 0.0;
    for &p in pos {
        for &n in neg {
            wins += if p > n {
                1.0
            } else if p == n {
                0.5
            } else {
                0.0
            };
        }
    }
    wins / (pos.len() * neg.len()) as f64
}

#[test]
fn auroc_examples() {
    assert_eq!(auroc(&[0.9, 0.8], &[0.1, 0.2]), Some(1.0));
    assert_eq!(auroc(&[0.1], &[0.9]), Some(0.0));
    assert_eq!(auroc(&[0.5, 0.5], &[0.5]), Some(0.5));
    assert_eq!(auroc(&[], &[0.5]), None);
}

proptest! {
    #[test]
    fn auroc_matches_pair_count(
        pos in prop::collection::vec(0u8..8, 1..30),
        neg in prop::collection::vec(0u8..8, 1..30),
    ) {
        let pos: Vec<f64> = pos.into_iter().map(f64::from).collect();
        let neg: Vec<f64> = neg.into_iter().map(f64::from).collect();
        let got = auroc(&pos, &neg).unwrap();
        prop_assert!((got - auroc_pairs(&pos, &neg)).abs() < 1e-12);
    }
}
