//! Incremental FITC surrogate over a fixed basis.
//!
//! The basis pairs `(u_m, v_m)` are K-means centers of the pool and uniform
//! draws from the probability simplex. With `k_i` the basis kernel vector of
//! pool point `i` and `λ_i = 1 - k_iᵀ K_PP⁻¹ k_i`, the state keeps
//!
//! - `Q⁻¹ = (K_PP + Σ_m k_m k_mᵀ / (λ_m + σ²))⁻¹` over the labels absorbed
//!   since the last rebuild,
//! - `r = Σ_m k_m (y_m - f(x_m))ᵀ / (λ_m + σ²)`,
//! - `S = Σ_j k_j k_jᵀ` over the unlabeled pool,
//!
//! so that a prediction is `μ_i = k_iᵀ Q⁻¹ r` and
//! `Σ_i = 1 - k_iᵀ (K_PP⁻¹ - Q⁻¹) k_i + σ²`, and absorbing a label is a
//! rank-one Sherman–Morrison step on `Q⁻¹`.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::Exp1;

use crate::kernel::KernelParams;
use crate::kmeans::kmeans;
use crate::linalg::{cholesky_with_retry, symmetrize};
use crate::rng::{self, stream};
use crate::{Error, Result};

/// Diagonal jitter for a basis Gram matrix that is singular or close to it.
pub const BASIS_JITTER: f64 = 1e-10;
/// Smallest squared Cholesky pivot accepted without jitter.
pub const MIN_PIVOT_SQ: f64 = 1e-12;

/// K-means centers of the pool, used as basis inputs.
pub fn select_basis_inputs(features: &[Vec<f64>], size: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    kmeans(features, size, seed)
}

/// `size` independent uniform draws from the probability simplex in
/// `num_classes` dimensions (normalized unit exponentials).
pub fn sample_basis_outputs(num_classes: usize, size: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng::substream(seed, stream::SIMPLEX);
    (0..size)
        .map(|_| {
            let draws: Vec<f64> = (0..num_classes).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            let total: f64 = draws.iter().sum();
            draws.into_iter().map(|d| d / total).collect()
        })
        .collect()
}

/// Basis pairs and the inverse of their Gram matrix.
#[derive(Debug, Clone)]
pub struct BasisSet {
    inputs: Vec<Vec<f64>>,
    outputs: Vec<Vec<f64>>,
    gram: DMatrix<f64>,
    gram_inv: DMatrix<f64>,
    factor: DMatrix<f64>,
    jitter: f64,
}

impl BasisSet {
    pub fn new(inputs: Vec<Vec<f64>>, outputs: Vec<Vec<f64>>, params: &KernelParams) -> Result<Self> {
        if inputs.is_empty() || inputs.len() != outputs.len() {
            return Err(Error::InvalidConfig(format!(
                "basis needs matching non-empty input/output sets, got {} and {}",
                inputs.len(),
                outputs.len()
            )));
        }
        let k = inputs.len();
        let gram = DMatrix::from_fn(k, k, |m, n| {
            params.input_kernel(&inputs[m], &inputs[n]) * params.output_kernel(&outputs[m], &outputs[n])
        });
        let plain = Cholesky::new(gram.clone())
            .filter(|c| c.l_dirty().diagonal().iter().all(|&p| p * p >= MIN_PIVOT_SQ));
        let (chol, jitter) = match plain {
            Some(c) => (c, 0.0),
            None => cholesky_with_retry(&gram, BASIS_JITTER)?,
        };
        let mut gram_inv = chol.inverse();
        symmetrize(&mut gram_inv);
        Ok(Self {
            inputs,
            outputs,
            gram,
            gram_inv,
            factor: chol.l(),
            jitter,
        })
    }

    /// K-means inputs plus simplex outputs.
    pub fn from_pool(
        features: &[Vec<f64>],
        num_classes: usize,
        size: usize,
        params: &KernelParams,
        seed: u64,
    ) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::SingleClass);
        }
        let inputs = select_basis_inputs(features, size, seed)?;
        let outputs = sample_basis_outputs(num_classes, size, seed);
        Self::new(inputs, outputs, params)
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Vec<f64>] {
        &self.outputs
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn gram_inv(&self) -> &DMatrix<f64> {
        &self.gram_inv
    }

    /// Lower Cholesky factor of `K_PP + jitter·I`.
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    /// Diagonal jitter the factorization needed (0 when none).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }
}

/// The surrogate posterior between two learner retrains.
///
/// Only `insert_label`, `carry_labels` and `rebuild` mutate it; every query
/// is a read.
#[derive(Debug, Clone)]
pub struct SurrogateState {
    basis: BasisSet,
    params: KernelParams,
    num_classes: usize,
    /// Input factor of `k_cache`; the pool and the basis never change.
    input_factor: DMatrix<f64>,
    k_cache: DMatrix<f64>,
    lambda: Vec<f64>,
    q_inv: DMatrix<f64>,
    cross: DMatrix<f64>,
    scatter: DMatrix<f64>,
    labeled: Vec<bool>,
    interval_labels: usize,
}

impl SurrogateState {
    /// Builds the state for a pool and immediately rebuilds it against
    /// the learner probabilities `probs`.
    pub fn new(
        basis: BasisSet,
        params: KernelParams,
        features: &[Vec<f64>],
        probs: &[Vec<f64>],
        labeled: &[bool],
    ) -> Self {
        assert_eq!(features.len(), probs.len(), "pool size mismatch");
        let num_classes = basis.outputs[0].len();
        let input_factor = DMatrix::from_fn(features.len(), basis.len(), |i, m| {
            params.input_kernel(&features[i], &basis.inputs[m])
        });
        let k = basis.len();
        let mut state = Self {
            q_inv: basis.gram_inv.clone(),
            basis,
            params,
            num_classes,
            input_factor,
            k_cache: DMatrix::zeros(features.len(), k),
            lambda: vec![0.0; features.len()],
            cross: DMatrix::zeros(k, num_classes),
            scatter: DMatrix::zeros(k, k),
            labeled: labeled.to_vec(),
            interval_labels: 0,
        };
        state.rebuild(probs, labeled);
        state
    }

    /// Re-anchors the surrogate on a fresh learner snapshot.
    ///
    /// Recomputes every basis kernel vector and `λ`, clears the absorbed
    /// labels (`Q⁻¹ = K_PP⁻¹`, `r = 0`) and recomputes `S` over the
    /// unlabeled part of `labeled`.
    pub fn rebuild(&mut self, probs: &[Vec<f64>], labeled: &[bool]) {
        let n = self.pool_size();
        assert_eq!(probs.len(), n, "snapshot size mismatch");
        assert_eq!(labeled.len(), n, "label mask size mismatch");
        let k = self.basis.len();
        let params = self.params;
        let outputs = &self.basis.outputs;
        for i in 0..n {
            assert_eq!(probs[i].len(), self.num_classes, "class count mismatch");
            for m in 0..k {
                self.k_cache[(i, m)] = self.input_factor[(i, m)] * params.output_kernel(&probs[i], &outputs[m]);
            }
        }

        // kᵢᵀK_PP⁻¹kᵢ = ‖L⁻¹kᵢ‖², which stays accurate at the basis points.
        let whitened = self
            .basis
            .factor
            .solve_lower_triangular(&self.k_cache.transpose())
            .expect("Cholesky factor has a positive diagonal");
        for i in 0..n {
            let quad = whitened.column(i).norm_squared();
            self.lambda[i] = (1.0 - quad).clamp(0.0, 1.0);
        }

        self.labeled.copy_from_slice(labeled);
        self.q_inv.copy_from(&self.basis.gram_inv);
        self.cross.fill(0.0);
        self.scatter = self.recompute_scatter();
        self.interval_labels = 0;
    }

    /// `S` summed directly over the current unlabeled set.
    pub fn recompute_scatter(&self) -> DMatrix<f64> {
        let rows: Vec<usize> = self.unlabeled_indices();
        let unl = self.k_cache.select_rows(rows.iter());
        unl.tr_mul(&unl)
    }

    /// Absorbs the label of an unlabeled pool point.
    ///
    /// `y` is the one-hot label, `fx` the learner probabilities the residual
    /// is taken against. Panics if `i` is already labeled.
    pub fn insert_label(&mut self, i: usize, y: &[f64], fx: &[f64]) {
        assert!(!self.labeled[i], "pool index {i} is already labeled");
        self.absorb(i, y, fx);
        let k = self.kernel_row(i);
        self.scatter.ger(-1.0, &k, &k, 1.0);
        self.labeled[i] = true;
    }

    /// Re-absorbs labels that are already marked labeled, leaving `S`
    /// untouched. Used to carry old labels across a rebuild.
    pub fn carry_labels<'a>(&mut self, labels: impl IntoIterator<Item = (usize, &'a [f64], &'a [f64])>) {
        for (i, y, fx) in labels {
            assert!(self.labeled[i], "carried index {i} is not labeled");
            self.absorb(i, y, fx);
        }
    }

    fn absorb(&mut self, i: usize, y: &[f64], fx: &[f64]) {
        assert_eq!(y.len(), self.num_classes, "label width mismatch");
        assert_eq!(fx.len(), self.num_classes, "probability width mismatch");
        let k = self.kernel_row(i);
        let scale = self.lambda[i] + self.params.noise_variance;

        // Q(i) = Q + a aᵀ with a = k / sqrt(λ + σ²); written in terms of k
        // to avoid forming a when λ + σ² is tiny.
        let w = &self.q_inv * &k;
        let denom = scale + k.dot(&w);
        self.q_inv.ger(-1.0 / denom, &w, &w, 1.0);
        symmetrize(&mut self.q_inv);

        let residual = DVector::from_iterator(self.num_classes, y.iter().zip(fx).map(|(a, b)| (a - b) / scale));
        self.cross.ger(1.0, &k, &residual, 1.0);
        self.interval_labels += 1;
    }

    /// Residual mean and isotropic variance of pool point `i`.
    pub fn predict(&self, i: usize) -> (Vec<f64>, f64) {
        let k = self.kernel_row(i);
        let mean = self.cross.tr_mul(&(&self.q_inv * &k));
        (mean.iter().copied().collect(), self.variance_from(i, &k))
    }

    fn variance_from(&self, i: usize, k: &DVector<f64>) -> f64 {
        let noise = self.params.noise_variance;
        let latent = self.lambda[i] + k.dot(&(&self.q_inv * k));
        (latent + noise).clamp(noise, 1.0 + noise)
    }

    /// Residual means for the whole pool, `N × C`.
    pub fn residual_means(&self) -> DMatrix<f64> {
        let weights = &self.q_inv * &self.cross;
        &self.k_cache * weights
    }

    /// Predictive variances for the given pool points.
    pub fn variances(&self, indices: &[usize]) -> Vec<f64> {
        let rows = self.k_cache.select_rows(indices.iter());
        let projected = &rows * &self.q_inv;
        let noise = self.params.noise_variance;
        indices
            .iter()
            .enumerate()
            .map(|(r, &i)| {
                let latent = self.lambda[i] + projected.row(r).dot(&rows.row(r));
                (latent + noise).clamp(noise, 1.0 + noise)
            })
            .collect()
    }

    pub fn kernel_row(&self, i: usize) -> DVector<f64> {
        self.k_cache.row(i).transpose()
    }

    pub fn kernel_cache(&self) -> &DMatrix<f64> {
        &self.k_cache
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn q_inv(&self) -> &DMatrix<f64> {
        &self.q_inv
    }

    pub fn cross_term(&self) -> &DMatrix<f64> {
        &self.cross
    }

    pub fn scatter(&self) -> &DMatrix<f64> {
        &self.scatter
    }

    pub fn basis(&self) -> &BasisSet {
        &self.basis
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn pool_size(&self) -> usize {
        self.k_cache.nrows()
    }

    pub fn is_labeled(&self, i: usize) -> bool {
        self.labeled[i]
    }

    pub fn unlabeled_indices(&self) -> Vec<usize> {
        (0..self.pool_size()).filter(|&i| !self.labeled[i]).collect()
    }

    /// Labels absorbed since the last rebuild.
    pub fn interval_labels(&self) -> usize {
        self.interval_labels
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::relative_frobenius;

    fn toy_pool(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut rng = rng::substream(seed, "toy");
        let feats: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random::<f64>() * 4.0, rng.random::<f64>() * 4.0]).collect();
        let probs = sample_basis_outputs(3, n, seed + 1);
        (feats, probs)
    }

    fn toy_state(n: usize, k: usize, seed: u64) -> (SurrogateState, Vec<Vec<f64>>) {
        let (feats, probs) = toy_pool(n, seed);
        let params = KernelParams::new(1.0, 3.0, 1e-10).unwrap();
        let basis = BasisSet::from_pool(&feats, 3, k, &params, seed).unwrap();
        let state = SurrogateState::new(basis, params, &feats, &probs, &vec![false; n]);
        (state, probs)
    }

    fn one_hot(c: usize, classes: usize) -> Vec<f64> {
        let mut y = vec![0.0; classes];
        y[c] = 1.0;
        y
    }

    /// `(K_PP + jitter·I + Σ_m k_m k_mᵀ / (λ_m + σ²))⁻¹` built from scratch.
    fn batch_q_inv(state: &SurrogateState, absorbed: &[usize]) -> DMatrix<f64> {
        let mut q = state.basis().gram().clone();
        for m in 0..q.nrows() {
            q[(m, m)] += state.basis().jitter();
        }
        for &i in absorbed {
            let k = state.kernel_row(i);
            q += &k * k.transpose() / (state.lambda()[i] + state.params().noise_variance);
        }
        q.try_inverse().unwrap()
    }

    #[test]
    fn simplex_samples_are_on_the_simplex() {
        for v in sample_basis_outputs(4, 500, 3) {
            assert!(v.iter().all(|&p| p >= 0.0));
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn simplex_coordinate_means() {
        // Dirichlet(1, ..., 1) has coordinate means 1/C.
        let two = sample_basis_outputs(2, 10_000, 7);
        let m2 = two.iter().map(|v| v[0]).sum::<f64>() / 10_000.0;
        assert!((m2 - 0.5).abs() < 0.02, "{m2}");
        let five = sample_basis_outputs(5, 10_000, 8);
        for c in 0..5 {
            let m = five.iter().map(|v| v[c]).sum::<f64>() / 10_000.0;
            assert!((m - 0.2).abs() < 0.02, "coordinate {c}: {m}");
        }
    }

    #[test]
    fn fresh_state_is_the_prior() {
        let (state, _) = toy_state(60, 8, 1);
        assert_eq!(state.interval_labels(), 0);
        for i in 0..state.pool_size() {
            let (mean, var) = state.predict(i);
            assert!(mean.iter().all(|&m| m == 0.0));
            assert!((var - (1.0 + 1e-10)).abs() < 1e-9, "var {var}");
            assert!((0.0..=1.0).contains(&state.lambda()[i]));
        }
    }

    #[test]
    fn rebuild_is_deterministic() {
        let (mut state, probs) = toy_state(40, 6, 2);
        let mask = vec![false; 40];
        state.insert_label(3, &one_hot(1, 3), &probs[3]);
        state.rebuild(&probs, &mask);
        let first = (state.k_cache.clone(), state.q_inv.clone(), state.scatter.clone(), state.lambda.clone());
        state.rebuild(&probs, &mask);
        assert_eq!(first.0, state.k_cache);
        assert_eq!(first.1, state.q_inv);
        assert_eq!(first.2, state.scatter);
        assert_eq!(first.3, state.lambda);
        assert!(state.cross_term().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn scatter_matches_direct_sum() {
        let (mut state, probs) = toy_state(50, 7, 3);
        let mut direct = DMatrix::zeros(7, 7);
        for i in 0..50 {
            let k = state.kernel_row(i);
            direct += &k * k.transpose();
        }
        assert!(relative_frobenius(state.scatter(), &direct) < 1e-12);

        for i in [4, 9, 17, 30] {
            state.insert_label(i, &one_hot(0, 3), &probs[i]);
        }
        let drift = (state.scatter() - state.recompute_scatter()).norm();
        assert!(drift < 1e-9, "drift {drift}");
    }

    #[test]
    fn single_insertion_matches_direct_inverse() {
        let (mut state, probs) = toy_state(80, 10, 4);
        state.insert_label(11, &one_hot(2, 3), &probs[11]);
        let want = batch_q_inv(&state, &[11]);
        assert!(relative_frobenius(state.q_inv(), &want) < 1e-8);
        let (_, var) = state.predict(11);
        assert!(var < 1.0 + 1e-10);
    }

    #[test]
    fn many_insertions_match_batch_inverse() {
        let (mut state, probs) = toy_state(300, 24, 5);
        let picks: Vec<usize> = (0..100).map(|j| (j * 37 + 5) % 300).collect();
        for &i in &picks {
            state.insert_label(i, &one_hot(i % 3, 3), &probs[i]);
        }
        let want = batch_q_inv(&state, &picks);
        let err = relative_frobenius(state.q_inv(), &want);
        assert!(err < 1e-6, "relative error {err}");
    }

    #[test]
    fn zero_residual_label_only_moves_the_covariance() {
        let (mut state, probs) = toy_state(40, 6, 6);
        let before = state.variances(&[0, 1, 2]);
        state.insert_label(7, &probs[7].clone(), &probs[7]);
        assert!(state.cross_term().iter().all(|&v| v == 0.0));
        let after = state.variances(&[0, 1, 2]);
        assert!(after.iter().zip(&before).all(|(a, b)| a <= b));
        assert!(after.iter().zip(&before).any(|(a, b)| a < b));
    }

    #[test]
    fn variance_never_rises_and_ignores_labels() {
        let (mut a, probs) = toy_state(120, 12, 7);
        let mut b = a.clone();
        let picks = [3, 50, 77, 4, 101, 64];
        for (step, &i) in picks.iter().enumerate() {
            let unl = a.unlabeled_indices();
            let before = a.variances(&unl);
            a.insert_label(i, &one_hot(step % 3, 3), &probs[i]);
            b.insert_label(i, &one_hot((step + 1) % 3, 3), &probs[i]);
            let after = a.variances(&unl);
            for (x, y) in after.iter().zip(&before) {
                assert!(*x <= *y + 1e-10);
            }
            assert_eq!(after, b.variances(&unl));
        }
    }

    #[test]
    fn bulk_queries_agree_with_pointwise() {
        let (mut state, probs) = toy_state(70, 9, 8);
        for i in [2, 40, 41] {
            state.insert_label(i, &one_hot(1, 3), &probs[i]);
        }
        let means = state.residual_means();
        let idx: Vec<usize> = (0..70).collect();
        let vars = state.variances(&idx);
        for i in 0..70 {
            let (m, v) = state.predict(i);
            for c in 0..3 {
                assert!((means[(i, c)] - m[c]).abs() < 1e-12);
            }
            assert!((vars[i] - v).abs() < 1e-12);
        }
    }

    #[test]
    #[should_panic(expected = "already labeled")]
    fn double_insert_panics() {
        let (mut state, probs) = toy_state(20, 4, 9);
        state.insert_label(1, &one_hot(0, 3), &probs[1]);
        state.insert_label(1, &one_hot(0, 3), &probs[1]);
    }

    #[test]
    fn basis_rejects_single_class_and_oversize() {
        let (feats, _) = toy_pool(10, 1);
        let params = KernelParams::new(1.0, 1.0, 1e-10).unwrap();
        assert!(matches!(BasisSet::from_pool(&feats, 1, 3, &params, 0), Err(Error::SingleClass)));
        assert!(BasisSet::from_pool(&feats, 2, 11, &params, 0).is_err());
    }
}
