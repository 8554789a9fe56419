//! Selection utilities over the surrogate state.
//!
//! `u¹` is the total predictive-variance reduction over the unlabeled pool
//! that labeling a candidate would cause. `u²` is the learner's entropy at
//! the last retrain, rescaled every stage by how much the surrogate's
//! softmax entropy moved. The two are standardized and mixed by the running
//! accuracy estimate `P`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::linalg::argmax;
use crate::sparse_gp::SurrogateState;
use crate::{Error, Result};

/// Per-step bounds on the calibration ratio.
pub const RATIO_FLOOR: f64 = 0.1;
pub const RATIO_CEILING: f64 = 10.0;
/// Floor for the previous-entropy denominator.
pub const ENTROPY_FLOOR: f64 = 1e-12;

/// Candidates scored per block in [`influence_utility`]; keeps the block's
/// `rows × K` intermediates cache-resident.
const INFLUENCE_BLOCK: usize = 256;

/// Influence utility `u¹` for each candidate.
///
/// With `w = Q⁻¹ k_i`, `u¹(i) = C · wᵀ S w / (λ_i + σ² + k_iᵀ w)`, where `S`
/// sums over every currently unlabeled point including `i`. Two `n × K × K`
/// products for `n` candidates.
pub fn influence_utility(state: &SurrogateState, candidates: &[usize]) -> Vec<f64> {
    let classes = state.num_classes() as f64;
    let noise = state.params().noise_variance;
    let lambda = state.lambda();
    let mut out = Vec::with_capacity(candidates.len());
    for block in candidates.chunks(INFLUENCE_BLOCK) {
        let rows = state.kernel_cache().select_rows(block.iter());
        let projected = &rows * state.q_inv();
        let spread = &projected * state.scatter();
        out.extend(block.iter().enumerate().map(|(r, &i)| {
            let w = projected.row(r);
            // PSD quadratic form; clamp away roundoff below zero.
            let numer = spread.row(r).dot(&w).max(0.0);
            let denom = lambda[i] + noise + w.dot(&rows.row(r));
            classes * numer / denom
        }));
    }
    out
}

/// Shannon entropy in nats, with `0 ln 0 = 0`.
pub fn entropy(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// `Ent(softmax(f(x_i) + μ_i))` for every pool point.
pub fn surrogate_softmax_entropies(state: &SurrogateState, probs: &[Vec<f64>]) -> Vec<f64> {
    let means = state.residual_means();
    probs
        .iter()
        .enumerate()
        .map(|(i, fx)| {
            let scores: Vec<f64> = fx.iter().enumerate().map(|(c, p)| p + means[(i, c)]).collect();
            entropy(&softmax(&scores))
        })
        .collect()
}

/// Single-point form of [`surrogate_softmax_entropies`].
pub fn surrogate_softmax_entropy(state: &SurrogateState, fx: &[f64], i: usize) -> f64 {
    let (mean, _) = state.predict(i);
    let scores: Vec<f64> = fx.iter().zip(&mean).map(|(p, m)| p + m).collect();
    entropy(&softmax(&scores))
}

/// Class the surrogate predicts for pool point `i`: argmax of `f(x_i) + μ_i`.
pub fn surrogate_class(state: &SurrogateState, fx: &[f64], i: usize) -> usize {
    let (mean, _) = state.predict(i);
    let scores: Vec<f64> = fx.iter().zip(&mean).map(|(p, m)| p + m).collect();
    argmax(&scores).expect("non-empty class scores")
}

/// Calibrated entropies `u²` and the surrogate entropies they track.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationState {
    calibrated: Vec<f64>,
    prev_surrogate: Vec<f64>,
    anchor: Vec<f64>,
    max_entropy: f64,
}

impl CalibrationState {
    /// Anchors on a retrain: calibrated values become the learner entropies
    /// and the surrogate entropies become the reference for the next ratio.
    pub fn anchored(learner_entropies: &[f64], surrogate_entropies: &[f64], num_classes: usize) -> Self {
        assert_eq!(learner_entropies.len(), surrogate_entropies.len());
        Self {
            calibrated: learner_entropies.to_vec(),
            prev_surrogate: surrogate_entropies.to_vec(),
            anchor: learner_entropies.to_vec(),
            max_entropy: (num_classes as f64).ln(),
        }
    }

    /// Multiplies each unlabeled entry by the ratio of current to previous
    /// surrogate entropy, then makes the current entropies the new
    /// reference. Returns the calibrated values (`u²`) for the whole pool.
    pub fn update(&mut self, surrogate_entropies: &[f64], unlabeled: &[usize]) -> &[f64] {
        for &i in unlabeled {
            let prev = self.prev_surrogate[i].max(ENTROPY_FLOOR);
            let ratio = (surrogate_entropies[i] / prev).clamp(RATIO_FLOOR, RATIO_CEILING);
            self.calibrated[i] = (self.calibrated[i] * ratio).clamp(0.0, self.max_entropy);
            self.prev_surrogate[i] = surrogate_entropies[i];
        }
        &self.calibrated
    }

    /// [`update`](Self::update) with the surrogate entropies computed from
    /// the state.
    pub fn update_from(&mut self, state: &SurrogateState, probs: &[Vec<f64>]) -> &[f64] {
        let current = surrogate_softmax_entropies(state, probs);
        let unlabeled = state.unlabeled_indices();
        self.update(&current, &unlabeled)
    }

    pub fn calibrated(&self) -> &[f64] {
        &self.calibrated
    }

    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    pub fn previous_surrogate(&self) -> &[f64] {
        &self.prev_surrogate
    }
}

/// Running accuracy of the surrogate's pre-label predictions on the points
/// it selects.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccuracyEstimator {
    pub correct: usize,
    pub total: usize,
}

impl AccuracyEstimator {
    pub fn record(&mut self, predicted: usize, truth: usize) {
        self.total += 1;
        if predicted == truth {
            self.correct += 1;
        }
    }

    /// `correct / total`, or 0 before any prediction.
    pub fn estimate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombinationMode {
    /// `(1 - P)·ū¹ + P·ū²`
    #[default]
    AccuracyWeighted,
    /// `½ū¹ + ½ū²`
    Uniform,
}

/// Divides by the population standard deviation; a constant vector maps to
/// zeros.
pub fn standardize(values: &[f64]) -> Vec<f64> {
    if values.is_empty() {
        return Vec::new();
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if std > 0.0 && std.is_finite() {
        values.iter().map(|v| v / std).collect()
    } else {
        vec![0.0; values.len()]
    }
}

/// Mixes the standardized utilities.
pub fn combine_utilities(u1: &[f64], u2: &[f64], accuracy: f64, mode: CombinationMode) -> Vec<f64> {
    assert_eq!(u1.len(), u2.len(), "utility vectors are not aligned");
    let weight = match mode {
        CombinationMode::AccuracyWeighted => accuracy.clamp(0.0, 1.0),
        CombinationMode::Uniform => 0.5,
    };
    standardize(u1)
        .into_iter()
        .zip(standardize(u2))
        .map(|(a, b)| (1.0 - weight) * a + weight * b)
        .collect()
}

/// Pool index of the best candidate; `utilities` is aligned with
/// `candidates`. Ties go to the earliest candidate.
pub fn select_next(utilities: &[f64], candidates: &[usize]) -> Option<usize> {
    assert_eq!(utilities.len(), candidates.len());
    argmax(utilities).map(|r| candidates[r])
}

/// Expected drop in summed surrogate softmax entropy over the unlabeled
/// pool, averaged over hypothetical labels weighted by the learner.
///
/// Shares the per-stage products across candidates, so scoring many
/// candidates costs one `O(nK²)` setup plus `O(nK + nC²)` each.
pub struct HypotheticalEntropy<'a> {
    state: &'a SurrogateState,
    probs: &'a [Vec<f64>],
    unlabeled: Vec<usize>,
    /// `K_u Q⁻¹`
    projected: DMatrix<f64>,
    /// `K_u Q⁻¹ r`
    means: DMatrix<f64>,
    current_total: f64,
}

impl<'a> HypotheticalEntropy<'a> {
    pub fn new(state: &'a SurrogateState, probs: &'a [Vec<f64>]) -> Result<Self> {
        if state.num_classes() < 2 {
            return Err(Error::SingleClass);
        }
        let unlabeled = state.unlabeled_indices();
        let rows = state.kernel_cache().select_rows(unlabeled.iter());
        let projected = &rows * state.q_inv();
        let means = &projected * state.cross_term();
        let current_total = unlabeled
            .iter()
            .enumerate()
            .map(|(r, &j)| Self::point_entropy(&probs[j], means.row(r).iter().copied()))
            .sum();
        Ok(Self {
            state,
            probs,
            unlabeled,
            projected,
            means,
            current_total,
        })
    }

    fn point_entropy(fx: &[f64], residual: impl Iterator<Item = f64>) -> f64 {
        let scores: Vec<f64> = fx.iter().zip(residual).map(|(p, m)| p + m).collect();
        entropy(&softmax(&scores))
    }

    pub fn utility(&self, i: usize) -> f64 {
        let state = self.state;
        let k = state.kernel_row(i);
        let scale = state.lambda()[i] + state.params().noise_variance;
        let w: DVector<f64> = state.q_inv() * &k;
        let denom = scale + k.dot(&w);
        // K_u w, and wᵀ r.
        let reach = &self.projected * &k;
        let w_cross = state.cross_term().tr_mul(&w);
        let fx = &self.probs[i];
        let classes = state.num_classes();

        let mut expected = 0.0;
        for (label, &weight) in fx.iter().enumerate() {
            if weight == 0.0 {
                continue;
            }
            let total: f64 = self
                .unlabeled
                .iter()
                .enumerate()
                .map(|(r, &j)| {
                    // K_u Q(i)⁻¹ r(i), row j, expanded through the rank-one update.
                    let residual = (0..classes).map(|c| {
                        let target = if c == label { 1.0 } else { 0.0 };
                        let shifted_base = self.means[(r, c)] - reach[r] * w_cross[c] / denom;
                        shifted_base + reach[r] * (target - fx[c]) / denom
                    });
                    Self::point_entropy(&self.probs[j], residual)
                })
                .sum();
            expected += weight * (self.current_total - total);
        }
        expected
    }
}

/// One-off `u³` for pool point `i`.
pub fn hypothetical_entropy_utility(state: &SurrogateState, probs: &[Vec<f64>], i: usize) -> Result<f64> {
    Ok(HypotheticalEntropy::new(state, probs)?.utility(i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelParams;
    use crate::sparse_gp::{sample_basis_outputs, BasisSet};
    use proptest::prelude::*;

    fn one_hot(c: usize, classes: usize) -> Vec<f64> {
        let mut y = vec![0.0; classes];
        y[c] = 1.0;
        y
    }

    fn line_state(xs: &[f64], probs: &[Vec<f64>], basis_x: &[f64]) -> SurrogateState {
        let params = KernelParams::new(1.0, 3.0, 1e-10).unwrap();
        let feats: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        let classes = probs[0].len();
        let basis = BasisSet::new(
            basis_x.iter().map(|&x| vec![x]).collect(),
            sample_basis_outputs(classes, basis_x.len(), 0),
            &params,
        )
        .unwrap();
        SurrogateState::new(basis, params, &feats, probs, &vec![false; xs.len()])
    }

    #[test]
    fn entropy_values() {
        assert!((entropy(&[0.25; 4]) - 4f64.ln()).abs() < 1e-15);
        assert_eq!(entropy(&[0.0, 1.0, 0.0]), 0.0);
        assert!((entropy(&[0.5, 0.5, 0.0, 0.0]) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn softmax_entropy_fresh_and_monotone() {
        let probs = vec![vec![1.0 / 3.0; 3]; 4];
        let state = line_state(&[0.0, 0.5, 1.0, 5.0], &probs, &[0.0, 1.0, 5.0]);
        let ents = surrogate_softmax_entropies(&state, &probs);
        for e in &ents {
            assert!((e - 3f64.ln()).abs() < 1e-15);
        }
        // Pushing one score up lowers the entropy.
        let base = entropy(&softmax(&[0.3, 0.3, 0.4]));
        let pushed = entropy(&softmax(&[0.3, 0.3, 0.9]));
        assert!(pushed < base);
        assert_eq!(ents[0], surrogate_softmax_entropy(&state, &probs[0], 0));
    }

    #[test]
    fn identical_points_identical_entropy() {
        let probs = vec![vec![0.2, 0.8]; 3];
        let mut state = line_state(&[1.0, 1.0, 3.0], &probs, &[0.0, 2.0]);
        state.insert_label(2, &one_hot(0, 2), &probs[2]);
        let ents = surrogate_softmax_entropies(&state, &probs);
        assert_eq!(ents[0], ents[1]);
    }

    #[test]
    fn influence_is_zero_for_remote_points() {
        let probs = vec![vec![0.5, 0.5]; 3];
        let state = line_state(&[0.0, 0.2, 1e4], &probs, &[0.0, 0.3]);
        let u = influence_utility(&state, &[0, 1, 2]);
        assert!(u[0] > 0.0 && u[1] > 0.0);
        assert_eq!(u[2], 0.0);
    }

    #[test]
    fn calibration_rules() {
        let learner = [0.5, 0.2, 0.9];
        let surrogate = [1.0, 1.0, 1.0];
        let mut cal = CalibrationState::anchored(&learner, &surrogate, 3);
        assert_eq!(cal.calibrated(), &learner);
        // Unchanged surrogate: unchanged u².
        assert_eq!(cal.update(&surrogate, &[0, 1, 2]), &learner);
        // Halved surrogate entropy halves the calibrated value; labeled entries stay put.
        let u2 = cal.update(&[0.5, 1.0, 0.5], &[0, 1]).to_vec();
        assert_eq!(u2, vec![0.25, 0.2, 0.9]);
        // Ratio floor.
        let u2 = cal.update(&[1e-6, 1.0, 1.0], &[0]).to_vec();
        assert!((u2[0] - 0.25 * RATIO_FLOOR).abs() < 1e-15);
        // Zero previous entropy hits the denominator floor and the ceiling.
        let mut cal = CalibrationState::anchored(&[0.1], &[0.0], 3);
        let u2 = cal.update(&[1.0], &[0]).to_vec();
        assert!((u2[0] - 0.1 * RATIO_CEILING).abs() < 1e-15);
        let u2 = CalibrationState::anchored(&[1.0], &[0.1], 3).update(&[1.0], &[0]).to_vec();
        assert!((u2[0] - 3f64.ln()).abs() < 1e-15, "clamped to ln C");
    }

    #[test]
    fn labeling_a_neighbor_lowers_calibrated_entropy() {
        let probs = vec![vec![0.5, 0.5]; 2];
        let mut state = line_state(&[0.0, 0.4], &probs, &[0.0, 0.4]);
        let learner: Vec<f64> = probs.iter().map(|p| entropy(p)).collect();
        let surrogate = surrogate_softmax_entropies(&state, &probs);
        let mut cal = CalibrationState::anchored(&learner, &surrogate, 2);
        state.insert_label(0, &one_hot(1, 2), &probs[0]);
        let before = cal.calibrated()[1];
        let after = cal.update_from(&state, &probs)[1];
        assert!(after < before, "{after} !< {before}");
    }

    #[test]
    fn accuracy_estimator() {
        let mut est = AccuracyEstimator::default();
        assert_eq!(est.estimate(), 0.0);
        for (p, t) in [(0, 0), (1, 1), (2, 0), (1, 1)] {
            est.record(p, t);
        }
        assert_eq!(est.estimate(), 0.75);
    }

    #[test]
    fn combination_endpoints() {
        let u1 = [0.1, 0.9, 0.3];
        let u2 = [0.8, 0.1, 0.2];
        let pick = |u: Vec<f64>| argmax(&u).unwrap();
        assert_eq!(pick(combine_utilities(&u1, &u2, 0.0, CombinationMode::AccuracyWeighted)), 1);
        assert_eq!(pick(combine_utilities(&u1, &u2, 1.0, CombinationMode::AccuracyWeighted)), 0);
        let uniform = combine_utilities(&u1, &u2, 0.0, CombinationMode::Uniform);
        let both = combine_utilities(&u1, &u2, 0.5, CombinationMode::AccuracyWeighted);
        assert_eq!(uniform, both);
        assert_eq!(standardize(&[2.0, 2.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn selection_rules() {
        assert_eq!(select_next(&[0.3], &[12]), Some(12));
        assert_eq!(select_next(&[1.0, 1.0, 1.0], &[4, 6, 9]), Some(4));
        let mut u = vec![0.0; 10];
        u[7] = 1.0;
        let idx: Vec<usize> = (0..10).collect();
        assert_eq!(select_next(&u, &idx), Some(7));
    }

    #[test]
    fn u3_matches_tentative_insertion() {
        let xs: Vec<f64> = (0..25).map(|i| i as f64 * 0.3).collect();
        let probs = sample_basis_outputs(3, 25, 4);
        let mut state = line_state(&xs, &probs, &[0.0, 1.5, 3.0, 4.5, 6.0]);
        state.insert_label(4, &one_hot(2, 3), &probs[4]);
        let unl = state.unlabeled_indices();
        let base: f64 = unl
            .iter()
            .map(|&j| surrogate_softmax_entropy(&state, &probs[j], j))
            .sum();
        let scorer = HypotheticalEntropy::new(&state, &probs).unwrap();
        for i in [0, 10, 24] {
            let mut want = 0.0;
            for c in 0..3 {
                let mut trial = state.clone();
                trial.insert_label(i, &one_hot(c, 3), &probs[i]);
                let total: f64 = unl
                    .iter()
                    .map(|&j| surrogate_softmax_entropy(&trial, &probs[j], j))
                    .sum();
                want += probs[i][c] * (base - total);
            }
            let got = scorer.utility(i);
            assert!((got - want).abs() < 1e-9 * (1.0 + want.abs()), "{got} vs {want}");
        }
    }

    #[test]
    fn u3_zero_for_remote_point_and_single_class_error() {
        let probs = vec![vec![0.3, 0.7]; 3];
        let state = line_state(&[0.0, 0.5, 1e4], &probs, &[0.0, 0.5]);
        assert_eq!(hypothetical_entropy_utility(&state, &probs, 2).unwrap(), 0.0);

        let params = KernelParams::new(1.0, 1.0, 1e-10).unwrap();
        let single = vec![vec![1.0]; 2];
        let basis = BasisSet::new(vec![vec![0.0]], vec![vec![1.0]], &params).unwrap();
        let state = SurrogateState::new(basis, params, &[vec![0.0], vec![1.0]], &single, &[false, false]);
        assert!(matches!(hypothetical_entropy_utility(&state, &single, 0), Err(Error::SingleClass)));
    }

    proptest! {
        #[test]
        fn positive_scaling_keeps_the_argmax(
            u1 in prop::collection::vec(0.0..10.0f64, 2..30),
            scale in 1e-3..1e3f64,
            accuracy in 0.0..1.0f64,
            seed in 0u64..1000,
        ) {
            let u2: Vec<f64> = (0..u1.len()).map(|i| ((i as u64 * 7919 + seed) % 97) as f64 / 97.0).collect();
            let scaled: Vec<f64> = u1.iter().map(|v| v * scale).collect();
            let a = combine_utilities(&u1, &u2, accuracy, CombinationMode::AccuracyWeighted);
            let b = combine_utilities(&scaled, &u2, accuracy, CombinationMode::AccuracyWeighted);
            let (ia, ib) = (argmax(&a).unwrap(), argmax(&b).unwrap());
            // Equal up to rounding of near-ties.
            prop_assert!(ia == ib || (a[ia] - a[ib]).abs() < 1e-9);
        }
    }
}
