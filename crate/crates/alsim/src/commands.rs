//! `run`, `sweep` and `gen`.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use alsim_core::acquisition::CombinationMode;
use alsim_core::dataset::{random_test_rows, Dataset};
use alsim_core::driver::{self, RunResult, Strategy};
use alsim_core::learner::{BuiltinLearner, ExternalPredictions, LearnerConfig, PrincipalLearner};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::io;
use crate::spec::{DatasetSpec, ExperimentSpec, GenSpec};

pub const THREADS_ENV: &str = "ALSIM_THREADS";

/// Every repeat of one strategy, in repeat order.
#[derive(Debug, Clone)]
pub struct StrategyRuns {
    pub strategy: Strategy,
    pub runs: Vec<RunResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub label_count: usize,
    pub mean_acc: f64,
    pub std_acc: f64,
    pub strategy: Strategy,
}

pub fn load_dataset(spec: &ExperimentSpec) -> CliResult<Dataset> {
    let (features, labels, test_rows) = match &spec.dataset {
        DatasetSpec::Csv {
            path,
            split,
            test_fraction,
        } => {
            let (x, y) = io::read_dataset(path)?;
            let rows = match split {
                Some(s) => io::read_split(s)?,
                None => random_test_rows(x.len(), *test_fraction, spec.seed),
            };
            (x, y, rows)
        }
        DatasetSpec::Synthetic {
            generator,
            test_fraction,
        } => {
            let (x, y) = generator.generate(spec.seed)?;
            let rows = random_test_rows(x.len(), *test_fraction, spec.seed);
            (x, y, rows)
        }
    };
    let data = Dataset::from_rows(features, labels, &test_rows).map_err(|e| CliError::Dataset(e.to_string()))?;
    if data.test.is_empty() {
        return Err(CliError::Dataset("test split is empty".into()));
    }
    if data.num_classes < 2 {
        return Err(CliError::Dataset("at least two classes are required".into()));
    }
    Ok(data)
}

/// Rayon pool capped by `ALSIM_THREADS` when set.
pub fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Config(e.to_string()))
}

enum Learner {
    Builtin(LearnerConfig),
    External(ExternalPredictions),
}

/// Runs every (strategy, repeat) pair. Results do not depend on the
/// thread count.
pub fn execute(spec: &ExperimentSpec, data: &Dataset) -> CliResult<Vec<StrategyRuns>> {
    for &s in &spec.strategies {
        spec.run.to_config(s, spec.seed).validate(data.pool_size())?;
    }
    let learner = match &spec.external_predictions {
        Some(p) => Learner::External(io::read_external_predictions(p)?),
        None => Learner::Builtin(spec.learner.clone()),
    };
    let jobs: Vec<(Strategy, usize)> = spec
        .strategies
        .iter()
        .flat_map(|&s| (0..spec.repeats).map(move |r| (s, r)))
        .collect();

    let pool = thread_pool()?;
    let results: Vec<alsim_core::Result<RunResult>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(strategy, r)| {
                let seed = spec.repeat_seed(r);
                let config = spec.run.to_config(strategy, seed);
                match &learner {
                    Learner::Builtin(c) => {
                        let l = BuiltinLearner::new(LearnerConfig { seed, ..c.clone() });
                        driver::run(&config, data, &l, data)
                    }
                    Learner::External(e) => driver::run(&config, data, e as &dyn PrincipalLearner, data),
                }
            })
            .collect()
    });

    let mut out: Vec<StrategyRuns> = spec
        .strategies
        .iter()
        .map(|&strategy| StrategyRuns {
            strategy,
            runs: Vec::with_capacity(spec.repeats),
        })
        .collect();
    for ((strategy, _), res) in jobs.into_iter().zip(results) {
        let slot = out.iter_mut().find(|s| s.strategy == strategy).expect("known strategy");
        slot.runs.push(res?);
    }
    Ok(out)
}

/// Mean and sample standard deviation of test accuracy per checkpoint.
pub fn curves(results: &[StrategyRuns]) -> Vec<CurveRow> {
    let mut rows = Vec::new();
    for s in results {
        let Some(first) = s.runs.first() else { continue };
        for (k, cp) in first.checkpoints.iter().enumerate() {
            let accs: Vec<f64> = s.runs.iter().map(|r| r.checkpoints[k].accuracy).collect();
            let n = accs.len() as f64;
            let mean = accs.iter().sum::<f64>() / n;
            let std = if accs.len() > 1 {
                (accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            rows.push(CurveRow {
                label_count: cp.labels,
                mean_acc: mean,
                std_acc: std,
                strategy: s.strategy,
            });
        }
    }
    rows
}

pub fn curves_csv(rows: &[CurveRow]) -> Vec<u8> {
    let mut text = String::from("label_count,mean_acc,std_acc,strategy\n");
    for r in rows {
        text.push_str(&format!(
            "{},{:.6},{:.6},{}\n",
            r.label_count, r.mean_acc, r.std_acc, r.strategy
        ));
    }
    text.into_bytes()
}

pub fn selections_csv(run: &RunResult) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for s in &run.selections {
        w.serialize(s).expect("in-memory write");
    }
    if run.selections.is_empty() {
        w.write_record([
            "stage",
            "index",
            "label",
            "u1",
            "u2",
            "utility",
            "accuracy_estimate",
            "u1_argmax",
            "u2_argmax",
            "retrained",
            "scoring_seconds",
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory write")
}

#[derive(Serialize)]
struct RunSummary<'a> {
    seed: u64,
    kernel: &'a Option<alsim_core::kernel::KernelParams>,
    initial: &'a [usize],
    checkpoints: &'a [driver::Checkpoint],
    mean_scoring_seconds: f64,
    retrain_seconds: f64,
    total_seconds: f64,
}

#[derive(Serialize)]
struct StrategySummary<'a> {
    strategy: Strategy,
    runs: Vec<RunSummary<'a>>,
}

#[derive(Serialize)]
struct DatasetSummary {
    pool_size: usize,
    test_size: usize,
    dim: usize,
    num_classes: usize,
}

#[derive(Serialize)]
struct Summary<'a> {
    spec: &'a ExperimentSpec,
    dataset: DatasetSummary,
    seeds: Vec<u64>,
    strategies: Vec<StrategySummary<'a>>,
}

pub fn summary_json(spec: &ExperimentSpec, data: &Dataset, results: &[StrategyRuns]) -> Vec<u8> {
    let summary = Summary {
        spec,
        dataset: DatasetSummary {
            pool_size: data.pool_size(),
            test_size: data.test.len(),
            dim: data.dim(),
            num_classes: data.num_classes,
        },
        seeds: (0..spec.repeats).map(|r| spec.repeat_seed(r)).collect(),
        strategies: results
            .iter()
            .map(|s| StrategySummary {
                strategy: s.strategy,
                runs: s
                    .runs
                    .iter()
                    .map(|r| RunSummary {
                        seed: r.seed,
                        kernel: &r.kernel,
                        initial: &r.initial,
                        checkpoints: &r.checkpoints,
                        mean_scoring_seconds: r.mean_scoring_seconds(),
                        retrain_seconds: r.retrain_seconds,
                        total_seconds: r.total_seconds,
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut bytes = serde_json::to_vec_pretty(&summary).expect("summary serializes");
    bytes.push(b'\n');
    bytes
}

/// Loads, runs and writes `curves.csv`, `summary.json` and
/// `runs/<strategy>/seed_<s>/selections.csv` under the output directory.
pub fn cmd_run(spec_path: &Path) -> CliResult<Vec<CurveRow>> {
    let spec = ExperimentSpec::load(spec_path)?;
    run_spec(&spec)
}

pub fn run_spec(spec: &ExperimentSpec) -> CliResult<Vec<CurveRow>> {
    let data = load_dataset(spec)?;
    let results = execute(spec, &data)?;
    let dir = &spec.output_dir;
    for s in &results {
        for r in &s.runs {
            let path = dir
                .join("runs")
                .join(s.strategy.name())
                .join(format!("seed_{}", r.seed))
                .join("selections.csv");
            io::write_atomic(&path, &selections_csv(r))?;
        }
    }
    let rows = curves(&results);
    io::write_atomic(&dir.join("curves.csv"), &curves_csv(&rows))?;
    io::write_atomic(&dir.join("summary.json"), &summary_json(spec, &data, &results))?;
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    BasisSize,
    SigmaXMultiplier,
    SigmaFMultiplier,
    NoiseVariance,
    Combination,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::BasisSize => "K",
            SweepAxis::SigmaXMultiplier => "sigma_x_multiplier",
            SweepAxis::SigmaFMultiplier => "sigma_f_multiplier",
            SweepAxis::NoiseVariance => "noise_variance",
            SweepAxis::Combination => "combination",
        }
    }

    /// Copy of `base` with this axis set to `value`.
    pub fn apply(self, base: &ExperimentSpec, value: &str) -> CliResult<ExperimentSpec> {
        let bad = || CliError::Config(format!("invalid value {value:?} for axis {}", self.name()));
        let num = || f64::from_str(value.trim()).ok().filter(|v| v.is_finite() && *v > 0.0).ok_or_else(bad);
        let mut spec = base.clone();
        let run = &mut spec.run;
        match self {
            SweepAxis::BasisSize => run.basis_size = value.trim().parse().ok().filter(|&k| k > 0).ok_or_else(bad)?,
            SweepAxis::SigmaXMultiplier => run.kernel.sigma_x_multiplier = num()?,
            SweepAxis::SigmaFMultiplier => run.kernel.sigma_f_multiplier = num()?,
            SweepAxis::NoiseVariance => run.kernel.noise_variance = num()?,
            SweepAxis::Combination => {
                run.combination = match value.trim() {
                    "accuracy_weighted" => CombinationMode::AccuracyWeighted,
                    "uniform" => CombinationMode::Uniform,
                    _ => return Err(bad()),
                }
            }
        }
        Ok(spec)
    }
}

impl FromStr for SweepAxis {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Ok(match s {
            "K" | "k" | "basis_size" => SweepAxis::BasisSize,
            "sigma_x_multiplier" => SweepAxis::SigmaXMultiplier,
            "sigma_f_multiplier" => SweepAxis::SigmaFMultiplier,
            "noise_variance" => SweepAxis::NoiseVariance,
            "combination" => SweepAxis::Combination,
            _ => {
                return Err(CliError::Config(format!(
                    "unknown sweep axis {s:?} (expected K, sigma_x_multiplier, sigma_f_multiplier, noise_variance or combination)"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis: &'static str,
    pub value: String,
    pub strategy: Strategy,
    pub label_count: usize,
    pub mean_acc: f64,
    pub base_mean_acc: f64,
    pub offset: f64,
}

fn value_dir(value: &str) -> String {
    value
        .trim()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Runs the base spec and one copy per value, writing each curves file to
/// `sweep_<axis>/<value>/curves.csv` and the offsets to `sweep_<axis>.csv`.
pub fn cmd_sweep(spec_path: &Path, axis: SweepAxis, values: &[String]) -> CliResult<Vec<SweepRow>> {
    let spec = ExperimentSpec::load(spec_path)?;
    sweep_spec(&spec, axis, values)
}

pub fn sweep_spec(spec: &ExperimentSpec, axis: SweepAxis, values: &[String]) -> CliResult<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }
    let variants: Vec<ExperimentSpec> = values.iter().map(|v| axis.apply(spec, v)).collect::<CliResult<_>>()?;
    let data = load_dataset(spec)?;
    let sweep_dir = spec.output_dir.join(format!("sweep_{}", axis.name()));

    let base = curves(&execute(spec, &data)?);
    io::write_atomic(&sweep_dir.join("base").join("curves.csv"), &curves_csv(&base))?;

    let mut rows = Vec::new();
    for (value, variant) in values.iter().zip(&variants) {
        let curve = curves(&execute(variant, &data)?);
        io::write_atomic(&sweep_dir.join(value_dir(value)).join("curves.csv"), &curves_csv(&curve))?;
        for (c, b) in curve.iter().zip(&base) {
            debug_assert_eq!((c.label_count, c.strategy), (b.label_count, b.strategy));
            rows.push(SweepRow {
                axis: axis.name(),
                value: value.trim().to_string(),
                strategy: c.strategy,
                label_count: c.label_count,
                mean_acc: c.mean_acc,
                base_mean_acc: b.mean_acc,
                offset: c.mean_acc - b.mean_acc,
            });
        }
    }
    let mut text = String::from("axis,value,strategy,label_count,mean_acc,base_mean_acc,offset\n");
    for r in &rows {
        text.push_str(&format!(
            "{},{},{},{},{:.6},{:.6},{:.6}\n",
            r.axis, r.value, r.strategy, r.label_count, r.mean_acc, r.base_mean_acc, r.offset
        ));
    }
    io::write_atomic(&spec.output_dir.join(format!("sweep_{}.csv", axis.name())), text.as_bytes())?;
    Ok(rows)
}

/// Writes `data.csv` and `split.txt` into `out_dir`.
pub fn cmd_gen(spec_path: &Path, out_dir: &Path) -> CliResult<(PathBuf, PathBuf)> {
    let spec = GenSpec::load(spec_path)?;
    gen_spec(&spec, out_dir)
}

pub fn gen_spec(spec: &GenSpec, out_dir: &Path) -> CliResult<(PathBuf, PathBuf)> {
    let (x, y) = spec.generator.generate(spec.seed)?;
    let rows = random_test_rows(x.len(), spec.test_fraction, spec.seed);
    let data = out_dir.join("data.csv");
    let split = out_dir.join("split.txt");
    io::write_atomic(&data, &io::dataset_csv(&x, &y))?;
    io::write_atomic(&split, io::split_text(&rows).as_bytes())?;
    Ok((data, split))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alsim_core::driver::Checkpoint;

    fn fake_run(strategy: Strategy, accs: &[(usize, f64)]) -> RunResult {
        RunResult {
            strategy,
            seed: 0,
            kernel: None,
            initial: vec![],
            selections: vec![],
            checkpoints: accs
                .iter()
                .map(|&(labels, accuracy)| Checkpoint { labels, accuracy })
                .collect(),
            diagnostics: vec![],
            retrain_seconds: 0.0,
            total_seconds: 0.0,
        }
    }

    #[test]
    fn curve_statistics() {
        let runs = StrategyRuns {
            strategy: Strategy::Random,
            runs: vec![
                fake_run(Strategy::Random, &[(10, 0.5), (20, 0.7)]),
                fake_run(Strategy::Random, &[(10, 0.7), (20, 0.7)]),
            ],
        };
        let rows = curves(&[runs]);
        assert_eq!(rows.len(), 2);
        assert!((rows[0].mean_acc - 0.6).abs() < 1e-15);
        // Sample sd of {0.5, 0.7}: sqrt(2 * 0.01 / 1).
        assert!((rows[0].std_acc - 0.02f64.sqrt()).abs() < 1e-12);
        assert_eq!(rows[1].std_acc, 0.0);
        let text = String::from_utf8(curves_csv(&rows)).unwrap();
        assert_eq!(
            text,
            "label_count,mean_acc,std_acc,strategy\n10,0.600000,0.141421,random\n20,0.700000,0.000000,random\n"
        );
    }

    #[test]
    fn sweep_axes_parse_and_apply() {
        let spec: ExperimentSpec = serde_json::from_str(
            r#"{"seed": 1, "output_dir": "o", "dataset": {"source": "csv", "path": "d.csv"}}"#,
        )
        .unwrap();
        let k: SweepAxis = "K".parse().unwrap();
        assert_eq!(k.apply(&spec, "64").unwrap().run.basis_size, 64);
        assert!(k.apply(&spec, "0").is_err());
        let c: SweepAxis = "combination".parse().unwrap();
        assert_eq!(c.apply(&spec, "uniform").unwrap().run.combination, CombinationMode::Uniform);
        assert!(c.apply(&spec, "mixed").is_err());
        let s: SweepAxis = "sigma_x_multiplier".parse().unwrap();
        assert_eq!(s.apply(&spec, "0.3").unwrap().run.kernel.sigma_x_multiplier, 0.3);
        assert!(s.apply(&spec, "-1").is_err());
        assert!("temperature".parse::<SweepAxis>().is_err());
        assert_eq!(value_dir("1e-4"), "1e-4");
        assert_eq!(value_dir("a/b"), "a_b");
    }
}
