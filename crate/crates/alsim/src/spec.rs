//! Experiment specification files.

use std::path::{Path, PathBuf};

use alsim_core::acquisition::CombinationMode;
use alsim_core::dataset::Synthetic;
use alsim_core::driver::{InitialPolicy, RunConfig, Strategy};
use alsim_core::kernel::KernelSettings;
use alsim_core::learner::LearnerConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Where the rows come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    /// A CSV file; test rows come from `split` when given, otherwise a seeded
    /// random `test_fraction` of the rows.
    Csv {
        path: PathBuf,
        #[serde(default)]
        split: Option<PathBuf>,
        #[serde(default = "default_test_fraction")]
        test_fraction: f64,
    },
    Synthetic {
        generator: Synthetic,
        #[serde(default = "default_test_fraction")]
        test_fraction: f64,
    },
}

fn default_test_fraction() -> f64 {
    0.2
}

/// Run settings shared by every strategy of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    pub budget: usize,
    pub interval: usize,
    pub initial_labels: usize,
    pub initial_policy: InitialPolicy,
    pub basis_size: usize,
    pub kernel: KernelSettings,
    pub combination: CombinationMode,
    /// Defaults to the initial count, every retrain stage, and the budget.
    pub checkpoints: Option<Vec<usize>>,
    pub carry_labels: bool,
    pub forced_accuracy: Option<f64>,
    pub u3_ablation: bool,
    pub diagnostics: bool,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            budget: 200,
            interval: 50,
            initial_labels: 20,
            initial_policy: InitialPolicy::UniformRandom,
            basis_size: 128,
            kernel: KernelSettings::default(),
            combination: CombinationMode::AccuracyWeighted,
            checkpoints: None,
            carry_labels: false,
            forced_accuracy: None,
            u3_ablation: false,
            diagnostics: false,
        }
    }
}

impl RunSettings {
    pub fn checkpoints(&self) -> Vec<usize> {
        if let Some(c) = &self.checkpoints {
            let mut c = c.clone();
            c.sort_unstable();
            c.dedup();
            return c;
        }
        let mut c = vec![self.initial_labels];
        if let Some(q) = self.initial_labels.checked_div(self.interval) {
            let first = q + 1;
            c.extend((first..).map(|k| k * self.interval).take_while(|&t| t < self.budget));
        }
        c.push(self.budget);
        c.dedup();
        c
    }

    pub fn to_config(&self, strategy: Strategy, seed: u64) -> RunConfig {
        RunConfig {
            budget: self.budget,
            interval: self.interval,
            initial_labels: self.initial_labels,
            initial_policy: self.initial_policy,
            basis_size: self.basis_size,
            kernel: self.kernel,
            combination: self.combination,
            strategy,
            checkpoints: self.checkpoints(),
            seed,
            carry_labels: self.carry_labels,
            forced_accuracy: self.forced_accuracy,
            u3_ablation: self.u3_ablation,
            diagnostics: self.diagnostics,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub seed: u64,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    pub output_dir: PathBuf,
    pub dataset: DatasetSpec,
    #[serde(default)]
    pub run: RunSettings,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<Strategy>,
    #[serde(default)]
    pub learner: LearnerConfig,
    /// JSON file of precomputed learner outputs used instead of the
    /// built-in learner.
    #[serde(default)]
    pub external_predictions: Option<PathBuf>,
}

fn default_repeats() -> usize {
    1
}

fn default_strategies() -> Vec<Strategy> {
    vec![Strategy::GpSurrogate, Strategy::Random]
}

impl ExperimentSpec {
    /// Reads a spec; relative paths inside it are resolved against the
    /// spec file's directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut spec: Self =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        spec.resolve_paths(base);
        spec.validate()?;
        Ok(spec)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output_dir);
        if let DatasetSpec::Csv { path, split, .. } = &mut self.dataset {
            fix(path);
            if let Some(s) = split {
                fix(s);
            }
        }
        if let Some(p) = &mut self.external_predictions {
            fix(p);
        }
    }

    /// Checks that do not need the dataset.
    pub fn validate(&self) -> CliResult<()> {
        let fail = |m: String| Err(CliError::Config(m));
        if self.repeats == 0 {
            return fail("repeats must be at least 1".into());
        }
        if self.strategies.is_empty() {
            return fail("strategies must not be empty".into());
        }
        let mut seen = self.strategies.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.strategies.len() {
            return fail("strategies must not repeat".into());
        }
        let fraction = match &self.dataset {
            DatasetSpec::Csv { test_fraction, .. } | DatasetSpec::Synthetic { test_fraction, .. } => *test_fraction,
        };
        if !(0.0..1.0).contains(&fraction) {
            return fail(format!("test_fraction must lie in [0, 1), got {fraction}"));
        }
        self.learner.validate()?;
        Ok(())
    }

    /// Seed of the `r`-th repeat.
    pub fn repeat_seed(&self, r: usize) -> u64 {
        self.seed.wrapping_add(r as u64)
    }
}

/// Input to `alsim gen`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSpec {
    pub seed: u64,
    pub generator: Synthetic,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
}

impl GenSpec {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let spec: Self =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if !(0.0..1.0).contains(&spec.test_fraction) {
            return Err(CliError::Config(format!(
                "test_fraction must lie in [0, 1), got {}",
                spec.test_fraction
            )));
        }
        Ok(spec)
    }
}
