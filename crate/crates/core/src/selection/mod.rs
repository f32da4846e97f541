//! Query strategies.
//!
//! The clean-probability strategy groups unlabeled samples by pseudo-label,
//! queries the least clean ones per class, and mines the cleanest ones as
//! next round's pseudo-labeled set. Baselines share the same scored input.
//! Every ranking breaks ties by ascending sample index.

mod baselines;

pub use baselines::{
    baseline_badge, baseline_coreset, baseline_entropy, baseline_margin, baseline_random, entropy,
    gradient_embedding, margin,
};

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datastore::FeatureDataset;
use crate::error::{Error, Result};
use crate::model::ModelState;
use crate::numerics;

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSample {
    pub index: usize,
    pub pseudo_label: usize,
    pub clean_prob: f64,
    /// `(sim+ - sim-) / tau`, whose logistic is `clean_prob`. Rankings use
    /// it because `clean_prob` rounds to 1.0 for confident samples.
    pub clean_logit: f64,
    pub class_probs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelectionBudget {
    pub total: usize,
    pub num_classes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Ours,
    Random,
    Entropy,
    Margin,
    Coreset,
    Badge,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [
        Strategy::Ours,
        Strategy::Random,
        Strategy::Entropy,
        Strategy::Margin,
        Strategy::Coreset,
        Strategy::Badge,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Ours => "ours",
            Strategy::Random => "random",
            Strategy::Entropy => "entropy",
            Strategy::Margin => "margin",
            Strategy::Coreset => "coreset",
            Strategy::Badge => "badge",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown strategy {s:?}")))
    }
}

/// Ascending clean probability, then ascending index.
fn least_clean_first(a: &ScoredSample, b: &ScoredSample) -> Ordering {
    a.clean_logit
        .total_cmp(&b.clean_logit)
        .then(a.index.cmp(&b.index))
}

/// Descending clean probability, then ascending index.
fn most_clean_first(a: &ScoredSample, b: &ScoredSample) -> Ordering {
    b.clean_logit
        .total_cmp(&a.clean_logit)
        .then(a.index.cmp(&b.index))
}

/// Scores every index in `indices`; output is sorted by sample index.
pub fn score_pool(
    state: &ModelState,
    dataset: &FeatureDataset,
    indices: &[usize],
    tau: f64,
) -> Vec<ScoredSample> {
    let fwd = state.forward();
    let mut scored: Vec<ScoredSample> = indices
        .par_iter()
        .map(|&index| {
            let (class_probs, pseudo_label, clean_logit) = fwd.score(dataset.feature(index), tau);
            ScoredSample {
                index,
                pseudo_label,
                clean_prob: numerics::sigmoid(clean_logit),
                clean_logit,
                class_probs,
            }
        })
        .collect();
    scored.sort_by_key(|s| s.index);
    scored
}

fn group_by_label(scored: &[ScoredSample]) -> BTreeMap<usize, Vec<&ScoredSample>> {
    let mut groups: BTreeMap<usize, Vec<&ScoredSample>> = BTreeMap::new();
    for s in scored {
        groups.entry(s.pseudo_label).or_default().push(s);
    }
    groups
}

/// Takes `floor(B / C)` least-clean samples from each pseudo-class, then
/// fills the rest of the budget (the remainder plus any class shortfall)
/// with the least-clean samples left overall.
pub fn select_uncertain(scored: &[ScoredSample], budget: SelectionBudget) -> Vec<usize> {
    let target = budget.total.min(scored.len());
    if target == 0 {
        return Vec::new();
    }
    let quota = budget.total / budget.num_classes.max(1);
    let mut picked = Vec::with_capacity(target);
    let mut taken = std::collections::BTreeSet::new();
    for (_, mut members) in group_by_label(scored) {
        members.sort_by(|a, b| least_clean_first(a, b));
        for s in members.into_iter().take(quota) {
            picked.push(s.index);
            taken.insert(s.index);
        }
    }
    let mut rest: Vec<&ScoredSample> = scored
        .iter()
        .filter(|s| !taken.contains(&s.index))
        .collect();
    rest.sort_by(|a, b| least_clean_first(a, b));
    let missing = target - picked.len();
    picked.extend(rest.into_iter().take(missing).map(|s| s.index));
    picked
}

/// Up to `k` cleanest samples per pseudo-class, as `(index, pseudo_label)`
/// sorted by index.
pub fn mine_confident(scored: &[ScoredSample], k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (label, mut members) in group_by_label(scored) {
        members.sort_by(|a, b| most_clean_first(a, b));
        out.extend(members.into_iter().take(k).map(|s| (s.index, label)));
    }
    out.sort_unstable();
    out
}

/// Nearest-anchor pseudo-labels with anchor-softmax confidence; keeps the
/// `k` most confident candidates per predicted class, sorted by index.
/// Confidence is compared as log-odds `l_y - logsumexp(other logits)`,
/// which orders like the probability but does not round to a tie once the
/// probability reaches 1.0.
pub fn zero_shot_init(
    dataset: &FeatureDataset,
    candidates: &[usize],
    k: usize,
    tau: f64,
) -> Result<Vec<(usize, usize)>> {
    if !(tau > 0.0) {
        return Err(Error::InvalidTemperature(tau));
    }
    let mut by_class: BTreeMap<usize, Vec<(f64, usize)>> = BTreeMap::new();
    for &i in candidates {
        let x = dataset.feature(i);
        let logits: Vec<f64> = dataset
            .anchors()
            .iter_rows()
            .map(|a| numerics::dot(x, a) / tau)
            .collect();
        let label = numerics::argmax(&logits);
        let others: Vec<f64> = logits
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != label)
            .map(|(_, &l)| l)
            .collect();
        let log_odds = logits[label] - numerics::log_sum_exp(&others);
        by_class.entry(label).or_default().push((log_odds, i));
    }
    let mut out = Vec::new();
    for (label, mut members) in by_class {
        members.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        out.extend(members.into_iter().take(k).map(|(_, i)| (i, label)));
    }
    out.sort_unstable();
    Ok(out)
}
