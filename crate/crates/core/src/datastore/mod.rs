//! Dataset ingestion, synthetic generation, and pool bookkeeping.

mod dataset;
mod pool;

pub use dataset::{
    generate_synthetic, load_dataset, parse_header, save_dataset, DatasetHeader, FeatureDataset,
    SyntheticSpec, DATASET_MAGIC, DATASET_VERSION, LOAD_NORM_TOLERANCE,
};
pub use pool::{AnnotationOracle, PoolState};

use crate::error::{Error, Result};
use crate::numerics::RngStream;

/// Disjoint train-pool and held-out test indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub pool: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per-class holdout of `round(fraction * n_class)` samples (at least one
/// per class when `fraction > 0`). Both lists come back sorted.
pub fn stratified_split(dataset: &FeatureDataset, fraction: f64, rng: &RngStream) -> Result<Split> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidConfig(format!(
            "test fraction {fraction} not in [0, 1)"
        )));
    }
    let mut by_class = vec![Vec::new(); dataset.num_classes()];
    for i in 0..dataset.num_samples() {
        by_class[dataset.true_label(i)].push(i);
    }
    let (mut pool, mut test) = (Vec::new(), Vec::new());
    for (k, mut members) in by_class.into_iter().enumerate() {
        rng.child_indexed("class", k as u64).shuffle(&mut members);
        let mut take = (fraction * members.len() as f64).round() as usize;
        if fraction > 0.0 && take == 0 && members.len() > 1 {
            take = 1;
        }
        test.extend_from_slice(&members[..take]);
        pool.extend_from_slice(&members[take..]);
    }
    pool.sort_unstable();
    test.sort_unstable();
    Ok(Split { pool, test })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_is_stratified_and_disjoint() {
        let ds = generate_synthetic(
            &SyntheticSpec {
                n_per_class: 50,
                num_classes: 4,
                dim: 8,
                class_sep: 2.0,
                anchor_noise: 0.0,
            },
            &RngStream::new(1),
        )
        .unwrap();
        let split = stratified_split(&ds, 0.2, &RngStream::new(3)).unwrap();
        assert_eq!(split.test.len(), 40);
        assert_eq!(split.pool.len(), 160);
        for k in 0..4 {
            let n = split
                .test
                .iter()
                .filter(|&&i| ds.true_label(i) == k)
                .count();
            assert_eq!(n, 10);
        }
        let mut all = [split.pool.clone(), split.test.clone()].concat();
        all.sort_unstable();
        assert_eq!(all, (0..200).collect::<Vec<_>>());
        assert_eq!(
            split,
            stratified_split(&ds, 0.2, &RngStream::new(3)).unwrap()
        );
        assert!(stratified_split(&ds, 1.0, &RngStream::new(3)).is_err());
    }
}
