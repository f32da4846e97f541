//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage or configuration, 3 data, 4 internal
//! invariant.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{Map, Value};

use crate::datastore::{parse_header, save_dataset, FeatureDataset};
use crate::error::{Error, Result};
use crate::experiment::{run_experiment, write_reports, ExperimentConfig};
use crate::model::{gradient_check, Example, GradCheckReport, ModelState, Polarity};
use crate::numerics::RngStream;

/// Environment variable that overrides the experiment seed.
pub const SEED_ENV: &str = "DPAL_SEED";

/// Largest relative error `grad-check` accepts.
pub const GRAD_CHECK_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Parser)]
#[command(
    name = "dpal",
    version,
    about = "Dual-prompt active learning over frozen embeddings"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset file.
    GenSynth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment and write CSV and JSON reports.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Override a config key, e.g. `--set rounds=2`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Number of seeds to run concurrently.
        #[arg(long)]
        parallel_seeds: Option<usize>,
    },
    /// Compare closed-form gradients with finite differences.
    GradCheck {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the header of a dataset file.
    Inspect {
        #[arg(long)]
        dataset: PathBuf,
    },
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code. Errors are printed to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command) -> Result<i32> {
    let env_seed = std::env::var(SEED_ENV).ok();
    match command {
        Command::GenSynth { config, out } => {
            let cfg = resolve_config(&config, &[], env_seed.as_deref())?;
            if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                if !parent.is_dir() {
                    return Err(Error::InvalidConfig(format!(
                        "output directory {} does not exist",
                        parent.display()
                    )));
                }
            }
            let ds = cfg.generate_dataset()?;
            save_dataset(&ds, &out)?;
            print_dataset_summary(&ds);
            Ok(0)
        }
        Command::Run {
            config,
            out_dir,
            overrides,
            parallel_seeds,
        } => {
            let cfg = resolve_config(&config, &overrides, env_seed.as_deref())?;
            let ds = cfg.load_dataset()?;
            let result = run_experiment(&cfg, &ds, parallel_seeds)?;
            for path in write_reports(&result, &out_dir)? {
                println!("wrote {}", path.display());
            }
            for s in &result.summary {
                println!(
                    "round {} accuracy {:.4} +/- {:.4} ({} runs)",
                    s.round, s.accuracy_mean, s.accuracy_std, s.runs
                );
            }
            Ok(0)
        }
        Command::GradCheck { config } => {
            let cfg = resolve_config(&config, &[], env_seed.as_deref())?;
            let report = gradient_check_from_config(&cfg)?;
            println!("max_rel_error {:e}", report.max_rel_error);
            println!("max_abs_error {:e}", report.max_abs_error);
            println!("worst {}[{}]", report.worst.0, report.worst.1);
            println!("checked {}", report.checked);
            if report.max_rel_error < GRAD_CHECK_TOLERANCE {
                println!("PASS");
                Ok(0)
            } else {
                println!("FAIL (tolerance {GRAD_CHECK_TOLERANCE:e})");
                Ok(4)
            }
        }
        Command::Inspect { dataset } => {
            let bytes = fs::read(&dataset)?;
            let header = parse_header(&bytes)?;
            println!("version {}", header.version);
            println!("samples {}", header.num_samples);
            println!("dim {}", header.dim);
            println!("classes {}", header.num_classes);
            let ds = FeatureDataset::from_bytes(&bytes)?;
            println!("class_names {}", ds.class_names().join(","));
            Ok(0)
        }
    }
}

fn print_dataset_summary(ds: &FeatureDataset) {
    let all: Vec<usize> = (0..ds.num_samples()).collect();
    println!("samples {}", ds.num_samples());
    println!("dim {}", ds.dim());
    println!("classes {}", ds.num_classes());
    println!("zero_shot_accuracy {}", ds.nearest_anchor_accuracy(&all));
}

/// Defaults, then the config file, then `key=value` overrides, then the
/// seed environment variable.
pub fn resolve_config(
    path: &Path,
    overrides: &[String],
    env_seed: Option<&str>,
) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read config {}: {e}", path.display())))?;
    let mut doc: Value = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidConfig(format!("config {}: {e}", path.display())))?;
    let map: &mut Map<String, Value> = doc
        .as_object_mut()
        .ok_or_else(|| Error::InvalidConfig("config must be a JSON object".into()))?;
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("override {item:?} is not key=value")))?;
        // Bare words such as `ours` are taken as strings.
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        map.insert(key.trim().to_string(), value);
    }
    if let Some(seed) = env_seed {
        let seed: u64 = seed.trim().parse().map_err(|_| {
            Error::InvalidConfig(format!("{SEED_ENV}={seed:?} is not an unsigned integer"))
        })?;
        map.insert("seed".into(), Value::from(seed));
    }
    let cfg: ExperimentConfig =
        serde_json::from_value(doc).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Gradient check on a batch of the configured dataset at a generic
/// parameter point: context tokens and adapter `A` are perturbed away from
/// their initial values so that no gradient block is trivially zero.
pub fn gradient_check_from_config(cfg: &ExperimentConfig) -> Result<GradCheckReport> {
    let ds = cfg.load_dataset()?;
    let rng = RngStream::new(cfg.seed).child("grad_check");
    let shape = cfg.model_shape(ds.num_classes(), ds.dim());
    let mut state = ModelState::init(shape, ds.anchors(), &rng.child("init"))?;
    let mut g = rng.child("perturb");
    for polarity in [Polarity::Positive, Polarity::Negative] {
        for p in state.bank_mut().ctx_mut(polarity) {
            *p += 0.3 * g.normal();
        }
    }
    for p in state.adapter_mut().a_mut() {
        *p = 0.2 * g.normal();
    }

    let mut order: Vec<usize> = (0..ds.num_samples()).collect();
    rng.child("batch").shuffle(&mut order);
    order.truncate(cfg.grad_batch.max(1));
    let labels = ds.labels_for_evaluation(&order);
    let c = ds.num_classes();
    let mut comp = rng.child("complement");
    let batch: Vec<Example<'_>> = order
        .iter()
        .zip(&labels)
        .map(|(&i, &label)| {
            let r = comp.index(c - 1);
            Example {
                x: ds.feature(i),
                label,
                complement: if r >= label { r + 1 } else { r },
            }
        })
        .collect();
    gradient_check(&state, &batch, &cfg.train_config(), cfg.grad_eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_config(dir: &Path, text: &str) -> PathBuf {
        let p = dir.join("cfg.json");
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn precedence_is_defaults_file_overrides_env() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_config(
            dir.path(),
            r#"{"rounds": 3, "seed": 5, "strategy": "random"}"#,
        );
        let cfg = resolve_config(&p, &[], None).unwrap();
        assert_eq!(
            (cfg.rounds, cfg.seed, cfg.strategy.as_str()),
            (3, 5, "random")
        );
        assert_eq!(cfg.epochs, ExperimentConfig::default().epochs);

        let cfg = resolve_config(
            &p,
            &[
                "rounds=2".into(),
                "strategy=badge".into(),
                "seeds=[7]".into(),
            ],
            None,
        )
        .unwrap();
        assert_eq!((cfg.rounds, cfg.strategy.as_str()), (2, "badge"));
        assert_eq!(cfg.seeds, vec![7]);

        let cfg = resolve_config(&p, &["seed=9".into()], Some("11")).unwrap();
        assert_eq!(cfg.seed, 11);
    }

    #[test]
    fn bad_configs_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let cases = [
            r#"{"roundz": 3}"#,
            r#"{"strategy": "alfamix"}"#,
            r#"{"rounds": 0}"#,
            r#"{"tau": 0}"#,
            r#"[1, 2]"#,
            "not json",
        ];
        for text in cases {
            let p = write_config(dir.path(), text);
            let err = resolve_config(&p, &[], None).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text}: {err}");
        }
        let p = write_config(dir.path(), "{}");
        assert_eq!(
            resolve_config(&p, &["rounds".into()], None)
                .unwrap_err()
                .exit_code(),
            2
        );
        assert_eq!(
            resolve_config(&p, &[], Some("x")).unwrap_err().exit_code(),
            2
        );
        let missing = dir.path().join("missing.json");
        assert_eq!(
            resolve_config(&missing, &[], None).unwrap_err().exit_code(),
            2
        );
    }

    #[test]
    fn grad_check_rejects_step_out_of_range() {
        let cfg = ExperimentConfig {
            grad_eps: 1e-2,
            n_per_class: 5,
            ..ExperimentConfig::default()
        };
        assert_eq!(gradient_check_from_config(&cfg).unwrap_err().exit_code(), 2);
    }
}
