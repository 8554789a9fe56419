//! The active-learning loop.
//!
//! Each stage, with `t` labels in hand:
//! 1. on a retrain stage (`t` is the initial count or a multiple of the
//!    interval) the learner is retrained, the surrogate rebuilt on the new
//!    snapshot and the calibration re-anchored;
//! 2. test accuracy is recorded if `t` is a checkpoint;
//! 3. the strategy scores the unlabeled pool and picks the argmax;
//! 4. the surrogate's prediction on the pick is scored against the oracle
//!    label (feeding the accuracy estimate) before the label is absorbed.

use std::time::Instant;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::acquisition::{
    combine_utilities, influence_utility, select_next, standardize, surrogate_class, surrogate_softmax_entropies,
    AccuracyEstimator, CalibrationState, CombinationMode, HypotheticalEntropy,
};
use crate::dataset::{Dataset, Oracle};
use crate::kernel::{KernelParams, KernelSettings};
use crate::learner::{LearnerSnapshot, PrincipalLearner};
use crate::linalg::argmax;
use crate::rng::{self, stream};
use crate::sparse_gp::{BasisSet, SurrogateState};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Accuracy-weighted (or uniform) mix of influence and calibrated entropy.
    GpSurrogate,
    U1Only,
    U2Only,
    Random,
    /// Argmax of the stale learner entropy.
    MaxEntropy,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::GpSurrogate,
        Strategy::U1Only,
        Strategy::U2Only,
        Strategy::Random,
        Strategy::MaxEntropy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::GpSurrogate => "gp_surrogate",
            Strategy::U1Only => "u1_only",
            Strategy::U2Only => "u2_only",
            Strategy::Random => "random",
            Strategy::MaxEntropy => "max_entropy",
        }
    }

    pub fn uses_surrogate(self) -> bool {
        matches!(self, Strategy::GpSurrogate | Strategy::U1Only | Strategy::U2Only)
    }

    fn uses_influence(self) -> bool {
        matches!(self, Strategy::GpSurrogate | Strategy::U1Only)
    }

    fn uses_uncertainty(self) -> bool {
        matches!(self, Strategy::GpSurrogate | Strategy::U2Only)
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialPolicy {
    #[default]
    UniformRandom,
    /// Round-robin over classes (using oracle labels), random within class.
    Stratified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub budget: usize,
    pub interval: usize,
    pub initial_labels: usize,
    pub initial_policy: InitialPolicy,
    pub basis_size: usize,
    pub kernel: KernelSettings,
    pub combination: CombinationMode,
    pub strategy: Strategy,
    /// Label counts at which test accuracy is recorded.
    pub checkpoints: Vec<usize>,
    pub seed: u64,
    /// Re-absorb every earlier label (with fresh residuals) after a rebuild.
    pub carry_labels: bool,
    /// Replaces the running accuracy estimate in the combination.
    pub forced_accuracy: Option<f64>,
    /// Uses the hypothetical-entropy utility in place of calibrated entropy.
    pub u3_ablation: bool,
    /// Records per-stage variance and utility checks (extra `O(NK²)` per stage).
    pub diagnostics: bool,
}

impl RunConfig {
    pub fn new(strategy: Strategy, budget: usize, interval: usize, initial_labels: usize) -> Self {
        Self {
            budget,
            interval,
            initial_labels,
            initial_policy: InitialPolicy::UniformRandom,
            basis_size: 128,
            kernel: KernelSettings::default(),
            combination: CombinationMode::AccuracyWeighted,
            strategy,
            checkpoints: vec![initial_labels, budget],
            seed: 0,
            carry_labels: false,
            forced_accuracy: None,
            u3_ablation: false,
            diagnostics: false,
        }
    }

    pub fn validate(&self, pool_size: usize) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.initial_labels == 0 {
            return fail("initial_labels must be at least 1".into());
        }
        if self.initial_labels > self.budget {
            return fail(format!(
                "initial_labels ({}) exceeds budget ({})",
                self.initial_labels, self.budget
            ));
        }
        if self.budget > pool_size {
            return fail(format!("budget ({}) exceeds pool size ({pool_size})", self.budget));
        }
        if self.interval == 0 {
            return fail("interval must be at least 1".into());
        }
        if self.strategy.uses_surrogate() && (self.basis_size == 0 || self.basis_size > pool_size) {
            return fail(format!(
                "basis_size must be in 1..={pool_size}, got {}",
                self.basis_size
            ));
        }
        if let Some(&bad) = self
            .checkpoints
            .iter()
            .find(|&&c| c < self.initial_labels || c > self.budget)
        {
            return fail(format!(
                "checkpoint {bad} outside [{}, {}]",
                self.initial_labels, self.budget
            ));
        }
        if let Some(p) = self.forced_accuracy {
            if !(0.0..=1.0).contains(&p) {
                return fail(format!("forced_accuracy must lie in [0, 1], got {p}"));
            }
        }
        Ok(())
    }

    fn is_retrain_stage(&self, labels: usize) -> bool {
        labels == self.initial_labels || labels.is_multiple_of(self.interval)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    /// Labels held when this point was chosen.
    pub stage: usize,
    pub index: usize,
    pub label: usize,
    pub u1: Option<f64>,
    pub u2: Option<f64>,
    pub utility: Option<f64>,
    /// Mixing weight used for this pick.
    pub accuracy_estimate: f64,
    /// Best candidate under each standardized utility alone.
    pub u1_argmax: Option<usize>,
    pub u2_argmax: Option<usize>,
    pub retrained: bool,
    pub scoring_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub labels: usize,
    pub accuracy: f64,
}

/// Optional per-stage checks (see [`RunConfig::diagnostics`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageDiagnostics {
    pub stage: usize,
    pub retrained: bool,
    pub min_u1: Option<f64>,
    /// Largest rise of any unlabeled variance across this stage's insertion.
    pub max_variance_increase: Option<f64>,
    /// On retrain stages, `max |u²_i - Ent(f(x_i))|` over candidates.
    pub anchor_deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub strategy: Strategy,
    pub seed: u64,
    pub kernel: Option<KernelParams>,
    pub initial: Vec<usize>,
    pub selections: Vec<SelectionRecord>,
    pub checkpoints: Vec<Checkpoint>,
    pub diagnostics: Vec<StageDiagnostics>,
    pub retrain_seconds: f64,
    pub total_seconds: f64,
}

impl RunResult {
    /// Every labeled pool index in labeling order.
    pub fn labeled(&self) -> Vec<usize> {
        self.initial
            .iter()
            .copied()
            .chain(self.selections.iter().map(|s| s.index))
            .collect()
    }

    pub fn mean_scoring_seconds(&self) -> f64 {
        if self.selections.is_empty() {
            return 0.0;
        }
        self.selections.iter().map(|s| s.scoring_seconds).sum::<f64>() / self.selections.len() as f64
    }
}

/// Fraction of rows whose most probable class is the true one.
pub fn evaluate(probs: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
    if probs.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    assert_eq!(probs.len(), labels.len());
    let hits = probs
        .iter()
        .zip(labels)
        .filter(|(p, &y)| argmax(p) == Some(y))
        .count();
    Ok(hits as f64 / probs.len() as f64)
}

/// Initial labeled set, shared by every strategy for a given seed.
pub fn initial_selection(config: &RunConfig, data: &Dataset, oracle: &dyn Oracle) -> Vec<usize> {
    let n = data.pool_size();
    let mut rng = rng::substream(config.seed, stream::INITIAL);
    match config.initial_policy {
        InitialPolicy::UniformRandom => index::sample(&mut rng, n, config.initial_labels).into_vec(),
        InitialPolicy::Stratified => {
            let order = index::sample(&mut rng, n, n).into_vec();
            let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); data.num_classes.max(1)];
            let last = by_class.len() - 1;
            for i in order {
                by_class[oracle.label(i).min(last)].push(i);
            }
            let mut picked = Vec::with_capacity(config.initial_labels);
            let mut round = 0;
            while picked.len() < config.initial_labels {
                for class in &by_class {
                    if let Some(&i) = class.get(round) {
                        if picked.len() < config.initial_labels {
                            picked.push(i);
                        }
                    }
                }
                round += 1;
            }
            picked
        }
    }
}

fn one_hot(class: usize, classes: usize) -> Vec<f64> {
    let mut y = vec![0.0; classes];
    y[class] = 1.0;
    y
}

/// Surrogate-side state, present only for strategies that use it.
struct SurrogateLoop {
    state: SurrogateState,
    calibration: CalibrationState,
    estimator: AccuracyEstimator,
}

/// Runs one active-learning experiment.
pub fn run(
    config: &RunConfig,
    data: &Dataset,
    learner: &dyn PrincipalLearner,
    oracle: &dyn Oracle,
) -> Result<RunResult> {
    let started = Instant::now();
    config.validate(data.pool_size())?;
    let n = data.pool_size();
    let classes = data.num_classes;
    let strategy = config.strategy;
    if strategy.uses_surrogate() && classes < 2 {
        return Err(Error::SingleClass);
    }

    let initial = initial_selection(config, data, oracle);
    let mut labeled = initial.clone();
    let mut labels: Vec<usize> = labeled.iter().map(|&i| oracle.label(i)).collect();
    let mut mask = vec![false; n];
    for &i in &labeled {
        mask[i] = true;
    }

    let (params, basis) = if strategy.uses_surrogate() {
        let params = config.kernel.resolve(&data.pool, classes, config.seed)?;
        let basis = BasisSet::from_pool(&data.pool, classes, config.basis_size, &params, config.seed)?;
        (Some(params), Some(basis))
    } else {
        (None, None)
    };
    let mut basis = basis;

    let mut checkpoints_todo: Vec<usize> = config.checkpoints.clone();
    checkpoints_todo.sort_unstable();
    checkpoints_todo.dedup();

    let mut snapshot: Option<LearnerSnapshot> = None;
    let mut surrogate: Option<SurrogateLoop> = None;
    let mut selection_rng = rng::substream(config.seed, stream::SELECTION);
    let mut result = RunResult {
        strategy,
        seed: config.seed,
        kernel: params,
        initial: initial.clone(),
        selections: Vec::with_capacity(config.budget - config.initial_labels),
        checkpoints: Vec::new(),
        diagnostics: Vec::new(),
        retrain_seconds: 0.0,
        total_seconds: 0.0,
    };

    loop {
        let t = labeled.len();
        let retrain = strategy != Strategy::Random && config.is_retrain_stage(t);
        let mut test_probs = None;

        if retrain {
            let clock = Instant::now();
            let preds = learner.fit_predict(data, &labeled, &labels)?;
            let snap = LearnerSnapshot::new(preds.pool, t);
            test_probs = Some(preds.test);

            if strategy.uses_surrogate() {
                let state = match surrogate.take() {
                    Some(mut s) => {
                        s.state.rebuild(&snap.probs, &mask);
                        let estimator = s.estimator;
                        (s.state, estimator)
                    }
                    None => {
                        let basis = basis.take().expect("basis built for surrogate strategies");
                        let params = params.expect("kernel resolved for surrogate strategies");
                        (
                            SurrogateState::new(basis, params, &data.pool, &snap.probs, &mask),
                            AccuracyEstimator::default(),
                        )
                    }
                };
                let (mut state, estimator) = state;
                if config.carry_labels {
                    let ys: Vec<Vec<f64>> = labels.iter().map(|&c| one_hot(c, classes)).collect();
                    state.carry_labels(
                        labeled
                            .iter()
                            .zip(&ys)
                            .map(|(&i, y)| (i, y.as_slice(), snap.probs[i].as_slice())),
                    );
                }
                let surrogate_ent = surrogate_softmax_entropies(&state, &snap.probs);
                let calibration = CalibrationState::anchored(&snap.entropies, &surrogate_ent, classes);
                surrogate = Some(SurrogateLoop {
                    state,
                    calibration,
                    estimator,
                });
            }
            snapshot = Some(snap);
            result.retrain_seconds += clock.elapsed().as_secs_f64();
        }

        if checkpoints_todo.first() == Some(&t) {
            checkpoints_todo.remove(0);
            let probs = match test_probs.take() {
                Some(p) => p,
                None => learner.fit_predict(data, &labeled, &labels)?.test,
            };
            result.checkpoints.push(Checkpoint {
                labels: t,
                accuracy: evaluate(&probs, &data.test_labels)?,
            });
        }

        if t >= config.budget {
            break;
        }

        let candidates: Vec<usize> = (0..n).filter(|&i| !mask[i]).collect();
        let clock = Instant::now();
        let mut record = SelectionRecord {
            stage: t,
            index: usize::MAX,
            label: usize::MAX,
            u1: None,
            u2: None,
            utility: None,
            accuracy_estimate: 0.0,
            u1_argmax: None,
            u2_argmax: None,
            retrained: retrain,
            scoring_seconds: 0.0,
        };
        let mut diag = StageDiagnostics {
            stage: t,
            retrained: retrain,
            min_u1: None,
            max_variance_increase: None,
            anchor_deviation: None,
        };

        let pick = match strategy {
            Strategy::Random => candidates[selection_rng.random_range(0..candidates.len())],
            Strategy::MaxEntropy => {
                let snap = snapshot.as_ref().expect("snapshot after first retrain");
                let scores: Vec<f64> = candidates.iter().map(|&i| snap.entropies[i]).collect();
                let pick = select_next(&scores, &candidates).expect("non-empty pool");
                record.utility = Some(snap.entropies[pick]);
                pick
            }
            Strategy::GpSurrogate | Strategy::U1Only | Strategy::U2Only => {
                let snap = snapshot.as_ref().expect("snapshot after first retrain");
                let sur = surrogate.as_mut().expect("surrogate after first retrain");

                let u1 = strategy
                    .uses_influence()
                    .then(|| influence_utility(&sur.state, &candidates));
                let u2 = if strategy.uses_uncertainty() {
                    Some(if config.u3_ablation {
                        let scorer = HypotheticalEntropy::new(&sur.state, &snap.probs)?;
                        candidates.iter().map(|&i| scorer.utility(i)).collect::<Vec<f64>>()
                    } else {
                        let calibrated = if retrain {
                            sur.calibration.calibrated()
                        } else {
                            sur.calibration.update_from(&sur.state, &snap.probs)
                        };
                        candidates.iter().map(|&i| calibrated[i]).collect()
                    })
                } else {
                    None
                };
                let accuracy = config.forced_accuracy.unwrap_or_else(|| sur.estimator.estimate());
                record.accuracy_estimate = accuracy;

                let utility = match (&u1, &u2) {
                    (Some(a), Some(b)) => combine_utilities(a, b, accuracy, config.combination),
                    (Some(a), None) => a.clone(),
                    (None, Some(b)) => b.clone(),
                    (None, None) => unreachable!("surrogate strategies score with u1 or u2"),
                };
                let pick = select_next(&utility, &candidates).expect("non-empty pool");
                let pos = candidates.binary_search(&pick).expect("pick is a candidate");
                record.utility = Some(utility[pos]);
                record.u1 = u1.as_ref().map(|u| u[pos]);
                record.u2 = u2.as_ref().map(|u| u[pos]);
                record.u1_argmax = u1.as_deref().and_then(|u| select_next(&standardize(u), &candidates));
                record.u2_argmax = u2.as_deref().and_then(|u| select_next(&standardize(u), &candidates));

                if config.diagnostics {
                    diag.min_u1 = u1.as_ref().map(|u| u.iter().copied().fold(f64::INFINITY, f64::min));
                    if retrain && !config.u3_ablation {
                        diag.anchor_deviation = u2.as_ref().map(|u| {
                            candidates
                                .iter()
                                .zip(u)
                                .map(|(&i, v)| (v - snap.entropies[i]).abs())
                                .fold(0.0, f64::max)
                        });
                    }
                }
                pick
            }
        };
        record.scoring_seconds = clock.elapsed().as_secs_f64();

        let label = oracle.label(pick);
        if let (Some(sur), Some(snap)) = (surrogate.as_mut(), snapshot.as_ref()) {
            // Score the pre-label prediction before the label enters the surrogate.
            let predicted = surrogate_class(&sur.state, &snap.probs[pick], pick);
            sur.estimator.record(predicted, label);

            let before = config.diagnostics.then(|| sur.state.variances(&candidates));
            sur.state.insert_label(pick, &one_hot(label, classes), &snap.probs[pick]);
            if let Some(before) = before {
                let after = sur.state.variances(&candidates);
                diag.max_variance_increase = Some(
                    after
                        .iter()
                        .zip(&before)
                        .map(|(a, b)| a - b)
                        .fold(f64::NEG_INFINITY, f64::max),
                );
            }
        }
        if config.diagnostics {
            result.diagnostics.push(diag);
        }

        record.index = pick;
        record.label = label;
        result.selections.push(record);
        labeled.push(pick);
        labels.push(label);
        mask[pick] = true;
    }

    result.total_seconds = started.elapsed().as_secs_f64();
    Ok(result)
}

/// [`run`] with the strategy forced to [`Strategy::Random`].
pub fn run_baseline_random(
    config: &RunConfig,
    data: &Dataset,
    learner: &dyn PrincipalLearner,
    oracle: &dyn Oracle,
) -> Result<RunResult> {
    run(
        &RunConfig {
            strategy: Strategy::Random,
            ..config.clone()
        },
        data,
        learner,
        oracle,
    )
}

/// [`run`] with the strategy forced to [`Strategy::MaxEntropy`].
pub fn run_baseline_max_entropy(
    config: &RunConfig,
    data: &Dataset,
    learner: &dyn PrincipalLearner,
    oracle: &dyn Oracle,
) -> Result<RunResult> {
    run(
        &RunConfig {
            strategy: Strategy::MaxEntropy,
            ..config.clone()
        },
        data,
        learner,
        oracle,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Synthetic;
    use crate::learner::{BuiltinLearner, LearnerConfig, Predictions};

    fn blobs(n: usize, seed: u64) -> Dataset {
        let (x, y) = Synthetic::Blobs {
            classes: 3,
            dim: 2,
            n,
            spread: 2.0,
            center_box: 4.0,
        }
        .generate(seed)
        .unwrap();
        let test: Vec<usize> = (0..n).filter(|i| i % 4 == 0).collect();
        Dataset::from_rows(x, y, &test).unwrap()
    }

    fn learner() -> BuiltinLearner {
        BuiltinLearner::new(LearnerConfig {
            epochs: 20,
            ..LearnerConfig::default()
        })
    }

    fn config(strategy: Strategy) -> RunConfig {
        RunConfig {
            basis_size: 16,
            checkpoints: vec![10, 20, 30],
            ..RunConfig::new(strategy, 30, 5, 10)
        }
    }

    #[test]
    fn zero_selection_run() {
        let data = blobs(80, 1);
        let mut cfg = config(Strategy::GpSurrogate);
        cfg.budget = 10;
        cfg.checkpoints = vec![10];
        let res = run(&cfg, &data, &learner(), &data).unwrap();
        assert!(res.selections.is_empty());
        assert_eq!(res.checkpoints.len(), 1);
    }

    #[test]
    fn random_is_reproducible_and_a_permutation() {
        let data = blobs(52, 2);
        assert_eq!(data.pool_size(), 39);
        let mut cfg = config(Strategy::Random);
        cfg.initial_labels = 1;
        cfg.budget = 39;
        cfg.checkpoints = vec![1, 39];
        let a = run(&cfg, &data, &learner(), &data).unwrap();
        let b = run(&cfg, &data, &learner(), &data).unwrap();
        assert_eq!(a.labeled(), b.labeled());
        let mut all = a.labeled();
        all.sort_unstable();
        assert_eq!(all, (0..39).collect::<Vec<_>>());
    }

    #[test]
    fn strategies_share_checkpoints_and_never_repeat() {
        let data = blobs(120, 3);
        for s in Strategy::ALL {
            let res = run(&config(s), &data, &learner(), &data).unwrap();
            let labels: Vec<usize> = res.checkpoints.iter().map(|c| c.labels).collect();
            assert_eq!(labels, vec![10, 20, 30], "{s}");
            assert_eq!(res.selections.len(), 20);
            let mut seen = res.labeled();
            seen.sort_unstable();
            seen.dedup();
            assert_eq!(seen.len(), 30, "{s} relabeled a point");
        }
    }

    #[test]
    fn max_entropy_prefers_uncertain_points() {
        // Learner stub: one-hot everywhere except a few uncertain rows.
        struct Stub;
        impl PrincipalLearner for Stub {
            fn fit_predict(&self, data: &Dataset, _: &[usize], _: &[usize]) -> Result<Predictions> {
                let pool = (0..data.pool_size())
                    .map(|i| if i % 7 == 3 { vec![0.4, 0.3, 0.3] } else { vec![1.0, 0.0, 0.0] })
                    .collect();
                Ok(Predictions {
                    pool,
                    test: vec![vec![1.0, 0.0, 0.0]; data.test.len()],
                })
            }
        }
        let data = blobs(80, 4);
        let mut cfg = config(Strategy::MaxEntropy);
        cfg.budget = 14;
        cfg.checkpoints = vec![];
        let res = run(&cfg, &data, &Stub, &data).unwrap();
        let uncertain_left = |labeled: &[usize]| (0..data.pool_size()).any(|i| i % 7 == 3 && !labeled.contains(&i));
        let mut labeled = res.initial.clone();
        for s in &res.selections {
            if uncertain_left(&labeled) {
                assert_eq!(s.index % 7, 3);
            }
            labeled.push(s.index);
        }
    }

    #[test]
    fn accuracy_estimate_scores_before_the_label_lands() {
        let data = blobs(120, 5);
        let cfg = config(Strategy::GpSurrogate);
        let res = run(&cfg, &data, &learner(), &data).unwrap();
        // The weight used at each pick only reflects earlier picks.
        assert_eq!(res.selections[0].accuracy_estimate, 0.0);
        for (k, s) in res.selections.iter().enumerate() {
            let p = s.accuracy_estimate * k as f64;
            assert!((p - p.round()).abs() < 1e-9);
        }
    }

    #[test]
    fn evaluate_edges() {
        assert!(matches!(evaluate(&[], &[]), Err(Error::EmptyTestSet)));
        assert_eq!(evaluate(&[vec![0.9, 0.1], vec![0.2, 0.8]], &[0, 1]).unwrap(), 1.0);
        let constant = vec![vec![1.0, 0.0, 0.0]; 6];
        assert!((evaluate(&constant, &[0, 1, 2, 0, 1, 2]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        let data = blobs(40, 6);
        let mut cfg = config(Strategy::Random);
        cfg.budget = 1000;
        assert!(matches!(run(&cfg, &data, &learner(), &data), Err(Error::InvalidConfig(_))));
        let mut cfg = config(Strategy::Random);
        cfg.interval = 0;
        assert!(cfg.validate(30).is_err());
        let mut cfg = config(Strategy::Random);
        cfg.checkpoints = vec![5];
        assert!(cfg.validate(30).is_err());
    }

    #[test]
    fn stratified_start_covers_classes() {
        let data = blobs(90, 7);
        let mut cfg = config(Strategy::Random);
        cfg.initial_policy = InitialPolicy::Stratified;
        cfg.initial_labels = 6;
        let init = initial_selection(&cfg, &data, &data);
        let mut classes: Vec<usize> = init.iter().map(|&i| data.pool_labels[i]).collect();
        classes.sort_unstable();
        assert_eq!(classes, vec![0, 0, 1, 1, 2, 2]);
    }
}
