use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::datastore::{generate_synthetic, load_dataset, FeatureDataset, SyntheticSpec};
use crate::error::{Error, Result};
use crate::model::{L2Sign, ModelShape, TrainConfig};
use crate::numerics::RngStream;
use crate::selection::Strategy;

/// Flat experiment configuration. Every key has a default, so `{}` is a
/// valid document; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub rounds: usize,
    pub budget_fraction: f64,
    pub strategy: Strategy,
    /// Experiment seed; every run derives its streams from it.
    pub seed: u64,
    /// One full run per entry.
    pub seeds: Vec<u64>,
    /// Zero-shot pseudo-labels kept per class before round 0.
    pub initial_per_class: usize,
    /// Confident samples mined per class after each round.
    pub confident_per_class: usize,
    pub test_fraction: f64,

    pub tau: f64,
    pub lambda: f64,
    pub lr: f64,
    pub epochs: usize,
    pub batch_labeled: usize,
    pub batch_pseudo: usize,
    pub l2_sign: L2Sign,

    pub context_len: usize,
    pub adapter_rank: usize,
    pub adapter_enabled: bool,
    pub shared_ctx: bool,

    /// DPAL file to load. When absent a synthetic set is generated from the
    /// parameters below.
    pub dataset: Option<PathBuf>,
    pub n_per_class: usize,
    pub num_classes: usize,
    pub dim: usize,
    pub class_sep: f64,
    pub anchor_noise: f64,
    pub synth_seed: u64,

    pub grad_eps: f64,
    pub grad_batch: usize,

    /// Write measured wall-clock times into reports. Off by default so
    /// repeated runs produce identical files.
    pub record_wall_clock: bool,
    /// Keep the freshly initialized model of every round as a checkpoint.
    pub save_checkpoints: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let train = TrainConfig::default();
        Self {
            rounds: 6,
            budget_fraction: 0.01,
            strategy: Strategy::Ours,
            seed: 0,
            seeds: vec![0, 1, 2],
            initial_per_class: 16,
            confident_per_class: 16,
            test_fraction: 0.2,
            tau: train.tau,
            lambda: train.lambda,
            lr: train.lr,
            epochs: train.epochs,
            batch_labeled: train.batch_labeled,
            batch_pseudo: train.batch_pseudo,
            l2_sign: train.l2_sign,
            context_len: 16,
            adapter_rank: 20,
            adapter_enabled: true,
            shared_ctx: false,
            dataset: None,
            n_per_class: 250,
            num_classes: 4,
            dim: 16,
            class_sep: 0.7,
            anchor_noise: 1.0,
            synth_seed: 0,
            grad_eps: 1e-4,
            grad_batch: 8,
            record_wall_clock: false,
            save_checkpoints: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::InvalidConfig("rounds must be >= 1".into()));
        }
        if !(self.budget_fraction > 0.0 && self.budget_fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "budget_fraction must be in (0, 1], got {}",
                self.budget_fraction
            )));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("seeds must not be empty".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "test_fraction must be in (0, 1), got {}",
                self.test_fraction
            )));
        }
        if self.context_len == 0 || (self.adapter_enabled && self.adapter_rank == 0) {
            return Err(Error::InvalidConfig(
                "context_len and adapter_rank must be >= 1".into(),
            ));
        }
        self.train_config().validate()
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            tau: self.tau,
            lambda: self.lambda,
            lr: self.lr,
            epochs: self.epochs,
            batch_labeled: self.batch_labeled,
            batch_pseudo: self.batch_pseudo,
            l2_sign: self.l2_sign,
        }
    }

    pub fn model_shape(&self, num_classes: usize, dim: usize) -> ModelShape {
        ModelShape {
            num_classes,
            dim,
            context_len: self.context_len,
            adapter_rank: self.adapter_rank,
            adapter_enabled: self.adapter_enabled,
            shared_ctx: self.shared_ctx,
        }
    }

    pub fn synthetic_spec(&self) -> SyntheticSpec {
        SyntheticSpec {
            n_per_class: self.n_per_class,
            num_classes: self.num_classes,
            dim: self.dim,
            class_sep: self.class_sep,
            anchor_noise: self.anchor_noise,
        }
    }

    pub fn generate_dataset(&self) -> Result<FeatureDataset> {
        generate_synthetic(&self.synthetic_spec(), &RngStream::new(self.synth_seed))
    }

    /// The configured dataset file, or the synthetic set when none is given.
    pub fn load_dataset(&self) -> Result<FeatureDataset> {
        match &self.dataset {
            Some(path) => load_dataset(path),
            None => self.generate_dataset(),
        }
    }
}
