use super::{Example, ModelState, TrainConfig};
use crate::datastore::{FeatureDataset, PoolState};
use crate::error::{Error, Result};
use crate::numerics::RngStream;

/// Cosine decay from `base` at step 0 to zero at `total`.
pub fn cosine_lr(base: f64, step: usize, total: usize) -> f64 {
    if total == 0 {
        return base;
    }
    let t = step.min(total) as f64 / total as f64;
    base * 0.5 * (1.0 + (std::f64::consts::PI * t).cos())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub steps: usize,
    pub first_loss: f64,
    pub last_loss: f64,
}

/// Trains on the pool's human-labeled and pseudo-labeled sets.
pub fn train(
    state: &mut ModelState,
    pool: &PoolState,
    dataset: &FeatureDataset,
    cfg: &TrainConfig,
    rng: &RngStream,
) -> Result<TrainSummary> {
    let labeled: Vec<(usize, usize)> = pool.labeled().iter().map(|(&i, &y)| (i, y)).collect();
    let pseudo: Vec<(usize, usize)> = pool.pseudo().iter().map(|(&i, &y)| (i, y)).collect();
    train_on(state, &labeled, &pseudo, dataset, cfg, rng)
}

/// Mini-batch SGD over interleaved labeled (true labels) and pseudo-labeled
/// batches.
///
/// Each step pairs one labeled batch with one pseudo batch and averages
/// their losses. An epoch runs as many steps as the longer stream needs and
/// the shorter stream wraps around. Both streams are reshuffled every epoch
/// and a complement label is drawn for every visit.
pub fn train_on(
    state: &mut ModelState,
    labeled: &[(usize, usize)],
    pseudo: &[(usize, usize)],
    dataset: &FeatureDataset,
    cfg: &TrainConfig,
    rng: &RngStream,
) -> Result<TrainSummary> {
    cfg.validate()?;
    if labeled.is_empty() && pseudo.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let c = state.num_classes();
    let n_batches = |len: usize, size: usize| len.div_ceil(size);
    let lab_batches = n_batches(labeled.len(), cfg.batch_labeled);
    let pse_batches = n_batches(pseudo.len(), cfg.batch_pseudo);
    let steps_per_epoch = lab_batches.max(pse_batches);
    let total = steps_per_epoch * cfg.epochs;

    let mut comp_rng = rng.child("complement");
    let mut draw_complement = |label: usize| {
        let r = comp_rng.index(c - 1);
        if r >= label {
            r + 1
        } else {
            r
        }
    };

    let mut summary = TrainSummary {
        steps: 0,
        first_loss: f64::NAN,
        last_loss: f64::NAN,
    };
    for epoch in 0..cfg.epochs {
        let mut lab = labeled.to_vec();
        let mut pse = pseudo.to_vec();
        rng.child_indexed("shuffle_labeled", epoch as u64)
            .shuffle(&mut lab);
        rng.child_indexed("shuffle_pseudo", epoch as u64)
            .shuffle(&mut pse);

        for s in 0..steps_per_epoch {
            let lab_batch = batch(
                dataset,
                &lab,
                cfg.batch_labeled,
                lab_batches,
                s,
                &mut draw_complement,
            );
            let pse_batch = batch(
                dataset,
                &pse,
                cfg.batch_pseudo,
                pse_batches,
                s,
                &mut draw_complement,
            );
            let step = epoch * steps_per_epoch + s;
            let loss = state.grad_step(&[&lab_batch, &pse_batch], cfg, step, total)?;
            if step == 0 {
                summary.first_loss = loss;
            }
            summary.last_loss = loss;
            summary.steps += 1;
        }
    }
    Ok(summary)
}

fn batch<'d>(
    dataset: &'d FeatureDataset,
    items: &[(usize, usize)],
    size: usize,
    count: usize,
    step: usize,
    draw_complement: &mut impl FnMut(usize) -> usize,
) -> Vec<Example<'d>> {
    if count == 0 {
        return Vec::new();
    }
    let b = step % count;
    items[b * size..((b + 1) * size).min(items.len())]
        .iter()
        .map(|&(i, y)| Example {
            x: dataset.feature(i),
            label: y,
            complement: draw_complement(y),
        })
        .collect()
}
