//! Round loop.
//!
//! A run bootstraps the pseudo-labeled set from the anchors, then repeats:
//! re-initialize the model from the round seed, train on the labeled and
//! pseudo-labeled sets, score the unlabeled pool, query the oracle, mine
//! the next pseudo-labeled set, commit, and evaluate on the held-out split.
//! An experiment repeats the run over a list of seeds and summarizes each
//! round across runs.

mod config;
mod report;

pub use config::ExperimentConfig;
pub use report::{csv_report, json_summary, report_file_stem, write_reports, CSV_HEADER};

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::datastore::{stratified_split, AnnotationOracle, FeatureDataset, PoolState};
use crate::error::{Error, Result};
use crate::model::{train, ModelState};
use crate::numerics::RngStream;
use crate::selection::{
    baseline_badge, baseline_coreset, baseline_entropy, baseline_margin, baseline_random,
    gradient_embedding, mine_confident, score_pool, select_uncertain, zero_shot_init, ScoredSample,
    SelectionBudget, Strategy,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundReport {
    pub round: usize,
    pub seed: u64,
    pub strategy: Strategy,
    /// Test accuracy of the model trained this round.
    pub accuracy: f64,
    /// Training set sizes this round.
    pub n_labeled: usize,
    pub n_pseudo: usize,
    /// Fraction of this round's pseudo-labels that are correct. Computed
    /// from ground truth for diagnostics only.
    pub pseudo_precision: Option<f64>,
    /// Clean probability of the predicted class over the unlabeled pool.
    pub pclean_mean: Option<f64>,
    pub pclean_min: Option<f64>,
    pub pclean_max: Option<f64>,
    /// Indices sent to the oracle, in selection order.
    pub selected: Vec<usize>,
    /// Next round's pseudo-labeled indices.
    pub mined: Vec<usize>,
    pub train_steps: usize,
    pub wall_ms: u64,
}

#[derive(Debug, Clone)]
pub struct RoundOutcome {
    pub pool: PoolState,
    pub model: ModelState,
    pub report: RoundReport,
    /// Checkpoint of the model right after re-initialization, when enabled.
    pub init_checkpoint: Option<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub seed: u64,
    pub pool_size: usize,
    pub test_size: usize,
    pub budget: usize,
    /// Accuracy of the untrained model (zero context, identity adapter).
    pub zero_shot_accuracy: f64,
    pub rounds: Vec<RoundReport>,
    pub final_labeled: usize,
    pub oracle_queries: usize,
    #[serde(skip)]
    pub init_checkpoints: Vec<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundSummary {
    pub round: usize,
    pub runs: usize,
    pub accuracy_mean: f64,
    /// Sample standard deviation; zero for a single run.
    pub accuracy_std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub runs: Vec<RunResult>,
    pub summary: Vec<RoundSummary>,
}

/// Everything a round needs besides the pool.
pub struct RunContext<'a> {
    pub dataset: &'a FeatureDataset,
    pub config: &'a ExperimentConfig,
    pub test: &'a [usize],
    /// Per-round annotation count.
    pub budget: usize,
    pub seed: u64,
    pub rng: RngStream,
}

impl RunContext<'_> {
    pub fn round_rng(&self, round: usize) -> RngStream {
        round_rng(&self.rng, round)
    }
}

/// Stream of run `seed` within an experiment seeded by `experiment_seed`.
pub fn run_rng(experiment_seed: u64, seed: u64) -> RngStream {
    RngStream::new(experiment_seed).child_indexed("run", seed)
}

fn round_rng(run: &RngStream, round: usize) -> RngStream {
    run.child_indexed("round", round as u64)
}

/// The parameters round `round` of run `seed` starts from. Depends only on
/// the seeds and the round index, never on earlier rounds.
pub fn initial_model(
    config: &ExperimentConfig,
    dataset: &FeatureDataset,
    seed: u64,
    round: usize,
) -> Result<ModelState> {
    let shape = config.model_shape(dataset.num_classes(), dataset.dim());
    let rng = round_rng(&run_rng(config.seed, seed), round).child("init");
    ModelState::init(shape, dataset.anchors(), &rng)
}

/// `ceil(fraction * pool_size)`, fixed for the whole run.
pub fn round_budget(fraction: f64, pool_size: usize) -> usize {
    ((fraction * pool_size as f64).ceil() as usize).min(pool_size)
}

/// Fraction of `test` whose predicted class equals the true label.
pub fn evaluate_accuracy(
    state: &ModelState,
    dataset: &FeatureDataset,
    test: &[usize],
) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let fwd = state.forward();
    let hits = test
        .par_iter()
        .filter(|&&i| fwd.predict(dataset.feature(i)) == dataset.true_label(i))
        .count();
    Ok(hits as f64 / test.len() as f64)
}

/// One round. With `query` set the round also selects, annotates, mines
/// and commits; otherwise it only trains and evaluates.
pub fn run_round(
    ctx: &RunContext<'_>,
    round: usize,
    pool: &PoolState,
    oracle: &mut AnnotationOracle<'_>,
    query: bool,
) -> Result<RoundOutcome> {
    if query && pool.unlabeled().is_empty() {
        return Err(Error::PoolExhausted);
    }
    let started = Instant::now();
    let cfg = ctx.config;
    let train_cfg = cfg.train_config();
    let rng = ctx.round_rng(round);

    let mut model = initial_model(cfg, ctx.dataset, ctx.seed, round)?;
    let init_checkpoint = cfg.save_checkpoints.then(|| model.to_checkpoint_bytes());
    let summary = train(
        &mut model,
        pool,
        ctx.dataset,
        &train_cfg,
        &rng.child("train"),
    )?;

    let unlabeled = pool.unlabeled_vec();
    let scored = score_pool(&model, ctx.dataset, &unlabeled, cfg.tau);

    let (next_pool, selected, mined) = if query {
        let selected = query_indices(ctx, &model, pool, &scored, &rng.child("strategy"))?;
        let labels = oracle.annotate(pool, &selected)?;
        let mined = mine_confident(&scored, cfg.confident_per_class);
        let next = pool.commit_round(&labels, &mined)?;
        next.check_invariants(ctx.dataset)?;
        if oracle.query_count() != next.labeled().len() {
            return Err(Error::Invariant(format!(
                "oracle answered {} queries but {} samples are labeled",
                oracle.query_count(),
                next.labeled().len()
            )));
        }
        let mined: Vec<usize> = next.pseudo().keys().copied().collect();
        (next, selected, mined)
    } else {
        (pool.clone(), Vec::new(), Vec::new())
    };

    let accuracy = evaluate_accuracy(&model, ctx.dataset, ctx.test)?;
    let pclean: Vec<f64> = scored.iter().map(|s| s.clean_prob).collect();
    let report = RoundReport {
        round,
        seed: ctx.seed,
        strategy: cfg.strategy,
        accuracy,
        n_labeled: pool.labeled().len(),
        n_pseudo: pool.pseudo().len(),
        pseudo_precision: precision(ctx.dataset, pool),
        pclean_mean: (!pclean.is_empty()).then(|| pclean.iter().sum::<f64>() / pclean.len() as f64),
        pclean_min: pclean.iter().copied().reduce(f64::min),
        pclean_max: pclean.iter().copied().reduce(f64::max),
        selected,
        mined,
        train_steps: summary.steps,
        wall_ms: if cfg.record_wall_clock {
            started.elapsed().as_millis() as u64
        } else {
            0
        },
    };
    Ok(RoundOutcome {
        pool: next_pool,
        model,
        report,
        init_checkpoint,
    })
}

fn precision(dataset: &FeatureDataset, pool: &PoolState) -> Option<f64> {
    if pool.pseudo().is_empty() {
        return None;
    }
    let hits = pool
        .pseudo()
        .iter()
        .filter(|(&i, &y)| dataset.true_label(i) == y)
        .count();
    Some(hits as f64 / pool.pseudo().len() as f64)
}

fn query_indices(
    ctx: &RunContext<'_>,
    model: &ModelState,
    pool: &PoolState,
    scored: &[ScoredSample],
    rng: &RngStream,
) -> Result<Vec<usize>> {
    let budget = ctx.budget;
    let picks = match ctx.config.strategy {
        Strategy::Ours => select_uncertain(
            scored,
            SelectionBudget {
                total: budget,
                num_classes: ctx.dataset.num_classes(),
            },
        ),
        Strategy::Random => baseline_random(&pool.unlabeled_vec(), budget, rng),
        Strategy::Entropy => baseline_entropy(scored, budget),
        Strategy::Margin => baseline_margin(scored, budget),
        Strategy::Coreset => {
            let embed = |i: usize| model.visual_embed(ctx.dataset.feature(i));
            let centers: Vec<Vec<f64>> = pool.labeled().keys().map(|&i| embed(i)).collect();
            let candidates: Vec<(usize, Vec<f64>)> =
                scored.iter().map(|s| (s.index, embed(s.index))).collect();
            let center_refs: Vec<&[f64]> = centers.iter().map(Vec::as_slice).collect();
            let candidate_refs: Vec<(usize, &[f64])> =
                candidates.iter().map(|(i, v)| (*i, v.as_slice())).collect();
            baseline_coreset(&center_refs, &candidate_refs, budget)
        }
        Strategy::Badge => {
            let embeddings: Vec<(usize, Vec<f64>)> = scored
                .iter()
                .map(|s| {
                    let v = model.visual_embed(ctx.dataset.feature(s.index));
                    (
                        s.index,
                        gradient_embedding(&s.class_probs, s.pseudo_label, &v),
                    )
                })
                .collect();
            baseline_badge(&embeddings, budget, rng)
        }
    };
    Ok(picks)
}

/// A full run for one seed: split, zero-shot bootstrap, then rounds
/// `0..=rounds`. Rounds before the last query the oracle. The run stops
/// early once the pool is exhausted.
pub fn run_seed(
    config: &ExperimentConfig,
    dataset: &FeatureDataset,
    seed: u64,
) -> Result<RunResult> {
    config.validate()?;
    let rng = run_rng(config.seed, seed);
    let split = stratified_split(dataset, config.test_fraction, &rng.child("split"))?;
    if split.test.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let budget = round_budget(config.budget_fraction, split.pool.len());
    let ctx = RunContext {
        dataset,
        config,
        test: &split.test,
        budget,
        seed,
        rng,
    };

    let zero = ModelState::zero_context(
        config.model_shape(dataset.num_classes(), dataset.dim()),
        dataset.anchors(),
    )?;
    let zero_shot_accuracy = evaluate_accuracy(&zero, dataset, &split.test)?;

    let initial = zero_shot_init(dataset, &split.pool, config.initial_per_class, config.tau)?;
    let mut pool = PoolState::bootstrap(split.pool.iter().copied(), &initial)?;
    let mut oracle = AnnotationOracle::new(dataset);
    let mut rounds = Vec::with_capacity(config.rounds + 1);
    let mut init_checkpoints = Vec::new();

    for r in 0..=config.rounds {
        let query = r < config.rounds && !pool.unlabeled().is_empty();
        let outcome = run_round(&ctx, r, &pool, &mut oracle, query)?;
        rounds.push(outcome.report);
        init_checkpoints.extend(outcome.init_checkpoint);
        pool = outcome.pool;
        if !query {
            break;
        }
    }

    Ok(RunResult {
        seed,
        pool_size: split.pool.len(),
        test_size: split.test.len(),
        budget,
        zero_shot_accuracy,
        rounds,
        final_labeled: pool.labeled().len(),
        oracle_queries: oracle.query_count(),
        init_checkpoints,
    })
}

/// Runs every seed, sequentially or on `threads` workers, and summarizes.
/// Results are identical either way.
pub fn run_experiment(
    config: &ExperimentConfig,
    dataset: &FeatureDataset,
    threads: Option<usize>,
) -> Result<ExperimentResult> {
    config.validate()?;
    let runs: Vec<RunResult> = match threads {
        Some(n) if n > 1 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
            pool.install(|| {
                config
                    .seeds
                    .par_iter()
                    .map(|&s| run_seed(config, dataset, s))
                    .collect::<Result<Vec<_>>>()
            })?
        }
        _ => config
            .seeds
            .iter()
            .map(|&s| run_seed(config, dataset, s))
            .collect::<Result<Vec<_>>>()?,
    };
    let summary = summarize(&runs);
    Ok(ExperimentResult {
        config: config.clone(),
        runs,
        summary,
    })
}

/// Per-round mean and sample standard deviation across runs. Values are
/// summed in sorted order so that the result does not depend on run order.
pub fn summarize(runs: &[RunResult]) -> Vec<RoundSummary> {
    let max_rounds = runs.iter().map(|r| r.rounds.len()).max().unwrap_or(0);
    (0..max_rounds)
        .map(|round| {
            let mut acc: Vec<f64> = runs
                .iter()
                .filter_map(|r| r.rounds.get(round).map(|x| x.accuracy))
                .collect();
            acc.sort_by(f64::total_cmp);
            let n = acc.len() as f64;
            let mean = acc.iter().sum::<f64>() / n;
            let std = if acc.len() > 1 {
                let mut sq: Vec<f64> = acc.iter().map(|a| (a - mean).powi(2)).collect();
                sq.sort_by(f64::total_cmp);
                (sq.iter().sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            RoundSummary {
                round,
                runs: acc.len(),
                accuracy_mean: mean,
                accuracy_std: std,
            }
        })
        .collect()
}

/// Area under the ROC curve of `scores` for separating positives from
/// negatives; ties count one half.
pub fn auroc(positives: &[f64], negatives: &[f64]) -> Option<f64> {
    if positives.is_empty() || negatives.is_empty() {
        return None;
    }
    let mut all: Vec<(f64, bool)> = positives
        .iter()
        .map(|&s| (s, true))
        .chain(negatives.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Average ranks over tied groups, then Mann-Whitney U.
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        let avg_rank = (i + j + 1) as f64 / 2.0;
        rank_sum += avg_rank * all[i..j].iter().filter(|x| x.1).count() as f64;
        i = j;
    }
    let (np, nn) = (positives.len() as f64, negatives.len() as f64);
    Some((rank_sum - np * (np + 1.0) / 2.0) / (np * nn))
}

#[cfg(test)]
mod tests;
