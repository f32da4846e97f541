use std::collections::{BTreeMap, BTreeSet};

use super::FeatureDataset;
use crate::error::{Error, Result};

/// Labeled, pseudo-labeled and unlabeled partitions of the training pool.
///
/// `pseudo` is a subset of `unlabeled`: pseudo-labeled samples stay
/// eligible for annotation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolState {
    round: usize,
    labeled: BTreeMap<usize, usize>,
    pseudo: BTreeMap<usize, usize>,
    unlabeled: BTreeSet<usize>,
}

impl PoolState {
    /// Everything unlabeled, nothing pseudo-labeled, round 0.
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Self {
        Self {
            round: 0,
            labeled: BTreeMap::new(),
            pseudo: BTreeMap::new(),
            unlabeled: indices.into_iter().collect(),
        }
    }

    /// Round-0 pool seeded with an initial pseudo-labeled set.
    pub fn bootstrap(
        indices: impl IntoIterator<Item = usize>,
        initial_pseudo: &[(usize, usize)],
    ) -> Result<Self> {
        let mut pool = Self::new(indices);
        pool.pseudo = checked_pairs(initial_pseudo, "initial pseudo list")?;
        if let Some(i) = pool.pseudo.keys().find(|i| !pool.unlabeled.contains(i)) {
            return Err(Error::Overlap(format!(
                "pseudo index {i} is not in the pool"
            )));
        }
        Ok(pool)
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn labeled(&self) -> &BTreeMap<usize, usize> {
        &self.labeled
    }

    pub fn pseudo(&self) -> &BTreeMap<usize, usize> {
        &self.pseudo
    }

    pub fn unlabeled(&self) -> &BTreeSet<usize> {
        &self.unlabeled
    }

    pub fn unlabeled_vec(&self) -> Vec<usize> {
        self.unlabeled.iter().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.labeled.len() + self.unlabeled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Applies one round of annotations and replaces the pseudo-labeled set.
    /// A sample that is both newly labeled and in `new_pseudo` keeps only its
    /// human label.
    pub fn commit_round(
        &self,
        newly_labeled: &[(usize, usize)],
        new_pseudo: &[(usize, usize)],
    ) -> Result<PoolState> {
        let added = checked_pairs(newly_labeled, "newly labeled list")?;
        let mut pseudo = checked_pairs(new_pseudo, "pseudo list")?;
        pseudo.retain(|i, _| !added.contains_key(i));
        for &i in added.keys() {
            if !self.unlabeled.contains(&i) {
                return Err(Error::Overlap(format!(
                    "index {i} is not currently unlabeled"
                )));
            }
        }
        for &i in pseudo.keys() {
            if self.labeled.contains_key(&i) {
                return Err(Error::Overlap(format!("pseudo index {i} is labeled")));
            }
            if !self.unlabeled.contains(&i) {
                return Err(Error::Overlap(format!(
                    "pseudo index {i} is not in the pool"
                )));
            }
        }
        let mut next = self.clone();
        next.round += 1;
        for (i, y) in added {
            next.unlabeled.remove(&i);
            next.labeled.insert(i, y);
        }
        next.pseudo = pseudo;
        Ok(next)
    }

    /// Structural invariants plus agreement of human labels with ground truth.
    pub fn check_invariants(&self, dataset: &FeatureDataset) -> Result<()> {
        if let Some(i) = self.labeled.keys().find(|i| self.unlabeled.contains(i)) {
            return Err(Error::Invariant(format!(
                "index {i} both labeled and unlabeled"
            )));
        }
        if let Some(i) = self.pseudo.keys().find(|i| !self.unlabeled.contains(i)) {
            return Err(Error::Invariant(format!(
                "pseudo index {i} outside unlabeled set"
            )));
        }
        for (&i, &y) in &self.labeled {
            if i >= dataset.num_samples() || dataset.true_label(i) != y {
                return Err(Error::Invariant(format!(
                    "label of {i} disagrees with the oracle"
                )));
            }
        }
        Ok(())
    }
}

fn checked_pairs(pairs: &[(usize, usize)], what: &str) -> Result<BTreeMap<usize, usize>> {
    let mut out = BTreeMap::new();
    for &(i, y) in pairs {
        if out.insert(i, y).is_some() {
            return Err(Error::Overlap(format!("duplicate index {i} in {what}")));
        }
    }
    Ok(out)
}

/// Simulated human annotator backed by the hidden labels.
#[derive(Debug)]
pub struct AnnotationOracle<'a> {
    dataset: &'a FeatureDataset,
    queries: usize,
}

impl<'a> AnnotationOracle<'a> {
    pub fn new(dataset: &'a FeatureDataset) -> Self {
        Self {
            dataset,
            queries: 0,
        }
    }

    pub fn query_count(&self) -> usize {
        self.queries
    }

    /// Reveals true labels for currently unlabeled pool members. The pool
    /// is not modified.
    pub fn annotate(&mut self, pool: &PoolState, indices: &[usize]) -> Result<Vec<(usize, usize)>> {
        let n = self.dataset.num_samples();
        let mut seen = BTreeSet::new();
        for &i in indices {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, len: n });
            }
            if pool.labeled.contains_key(&i) || !seen.insert(i) {
                return Err(Error::AlreadyLabeled(i));
            }
            if !pool.unlabeled.contains(&i) {
                return Err(Error::IndexOutOfRange { index: i, len: n });
            }
        }
        self.queries += indices.len();
        Ok(indices
            .iter()
            .map(|&i| (i, self.dataset.true_label(i)))
            .collect())
    }
}
