//! Run configuration for the command-line pipeline.
//!
//! A single JSON file configures every stage. Every field is optional and
//! falls back to the default shown by `gcmi config`; unknown keys are
//! rejected. Each stage's own `seed` field is ignored by the CLI, which
//! derives per-stage seeds from the top-level `seed`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::chained::GcmiConfig;
use crate::error::{Error, Result};
use crate::eval::BenchmarkSpec;
use crate::io::SchemaHints;
use crate::lab::{AmputationSpec, SyntheticSpec};
use crate::rng::{derive_seed, label};

/// File names used by the pipeline stages, relative to `output_dir` unless
/// absolute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IoPaths {
    pub simulated: PathBuf,
    pub amputed: PathBuf,
    pub mask: PathBuf,
    pub imputed_prefix: String,
    pub benchmark_dir: PathBuf,
}

impl Default for IoPaths {
    fn default() -> Self {
        IoPaths {
            simulated: "simulated.csv".into(),
            amputed: "amputed.csv".into(),
            mask: "mask.csv".into(),
            imputed_prefix: "imputed".into(),
            benchmark_dir: "benchmark".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Worker threads; `None` uses the available parallelism.
    pub threads: Option<usize>,
    pub output_dir: PathBuf,
    pub simulate: SyntheticSpec,
    pub ampute: AmputationSpec,
    pub impute: GcmiConfig,
    pub benchmark: BenchmarkSpec,
    pub io: IoPaths,
    /// Applied when reading CSV input.
    pub schema: SchemaHints,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            threads: None,
            output_dir: "gcmi_out".into(),
            simulate: SyntheticSpec::default(),
            ampute: AmputationSpec::default(),
            impute: GcmiConfig::default(),
            benchmark: BenchmarkSpec::default(),
            io: IoPaths::default(),
            schema: SchemaHints::default(),
        }
    }
}

/// Pipeline stages that consume randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Simulate,
    Ampute,
    Impute,
    Benchmark,
}

impl Stage {
    fn name(self) -> &'static str {
        match self {
            Stage::Simulate => "simulate",
            Stage::Ampute => "ampute",
            Stage::Impute => "impute",
            Stage::Benchmark => "benchmark",
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Seed for one stage, derived from the top-level seed.
    pub fn stage_seed(&self, stage: Stage) -> u64 {
        derive_seed(self.seed, &[label(stage.name())])
    }

    /// `p` resolved against `output_dir`.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_owned()
        } else {
            self.output_dir.join(p)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        self.impute.validate().map_err(|e| Error::Config(format!("impute: {e}")))?;
        self.benchmark
            .validate()
            .map_err(|e| Error::Config(format!("benchmark: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gcin::TrainConfig;

    #[test]
    fn default_hyperparameters() {
        let cfg = RunConfig::default();
        let t: &TrainConfig = &cfg.impute.train;
        assert_eq!(t.lr_generator, 0.001);
        assert_eq!(t.lr_discriminator, 0.0005);
        assert_eq!(t.l2, 0.0001);
        assert_eq!(t.gen_iters_per_cycle, 50);
        assert_eq!(t.disc_iters_per_cycle, 10);
        assert_eq!(t.batch_size, 256);
        assert_eq!(t.max_epochs, 10_000);
        assert_eq!(t.early_stop_tolerance, 1e-4);
        assert_eq!(t.early_stop_patience, 50);
        assert_eq!((t.adam_beta1, t.adam_beta2, t.adam_epsilon), (0.9, 0.999, 1e-8));
        assert_eq!(cfg.impute.max_chain_iters, 20);
        assert_eq!(cfg.impute.m_imputations, 5);
        assert_eq!((cfg.simulate.n, cfg.simulate.p, cfg.simulate.rho), (2000, 15, 0.3));
        assert_eq!(cfg.benchmark.mc_repeats, 100);
    }

    #[test]
    fn empty_object_is_the_default() {
        assert_eq!(RunConfig::from_json("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(RunConfig::from_json(r#"{"sed": 1}"#), Err(Error::Config(_))));
        assert!(RunConfig::from_json(r#"{"impute": {"train": {"lr": 0.1}}}"#).is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.seed = 42;
        cfg.impute.train.hidden_dims = Some(vec![16]);
        let back = RunConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn stage_seeds_are_distinct() {
        let cfg = RunConfig::default();
        let seeds = [Stage::Simulate, Stage::Ampute, Stage::Impute, Stage::Benchmark].map(|s| cfg.stage_seed(s));
        for i in 0..4 {
            for j in 0..i {
                assert_ne!(seeds[i], seeds[j]);
            }
        }
    }
}
