//! Exact GP regression on learner residuals.
//!
//! Cubic in the number of labels, so the selection loop never uses it; it
//! exists to check the sparse surrogate on small instances.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::kernel::{product_kernel, KernelParams};
use crate::linalg::cholesky_with_retry;
use crate::{Error, Result};

/// One labeled point: features, learner probabilities, one-hot label.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub x: Vec<f64>,
    pub fx: Vec<f64>,
    pub y: Vec<f64>,
}

/// Exact GP posterior over the residuals `y - f(x)`.
#[derive(Debug, Clone)]
pub struct DenseGp {
    inputs: Vec<(Vec<f64>, Vec<f64>)>,
    residuals: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    /// `(K + σ²I)⁻¹ · residuals`
    weights: DMatrix<f64>,
    noise_used: f64,
    params: KernelParams,
}

impl DenseGp {
    /// Factorizes `K + σ²I` over the observations, retrying once with extra
    /// jitter before giving up.
    pub fn fit(observations: &[Observation], params: KernelParams) -> Result<Self> {
        let t = observations.len();
        if t == 0 {
            return Err(Error::EmptyTrainingSet);
        }
        let classes = observations[0].y.len();
        let mut residuals = DMatrix::zeros(t, classes);
        for (m, obs) in observations.iter().enumerate() {
            assert_eq!(obs.y.len(), classes, "label width mismatch");
            assert_eq!(obs.fx.len(), classes, "probability width mismatch");
            for c in 0..classes {
                residuals[(m, c)] = obs.y[c] - obs.fx[c];
            }
        }

        let gram = DMatrix::from_fn(t, t, |m, n| {
            let (a, b) = (&observations[m], &observations[n]);
            product_kernel(&a.x, &b.x, &a.fx, &b.fx, &params)
        });
        let (chol, noise_used) = cholesky_with_retry(&gram, params.noise_variance)?;
        let weights = chol.solve(&residuals);

        Ok(Self {
            inputs: observations
                .iter()
                .map(|o| (o.x.clone(), o.fx.clone()))
                .collect(),
            residuals,
            chol,
            weights,
            noise_used,
            params,
        })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn residuals(&self) -> &DMatrix<f64> {
        &self.residuals
    }

    /// Noise actually on the diagonal (σ², or σ² plus the retry jitter).
    pub fn noise_used(&self) -> f64 {
        self.noise_used
    }

    /// Lower Cholesky factor of `K + σ²I`.
    pub fn factor(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    fn cross_kernel(&self, x: &[f64], fx: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.inputs.len(),
            self.inputs
                .iter()
                .map(|(xm, fm)| product_kernel(x, xm, fx, fm, &self.params)),
        )
    }

    /// Residual-scale mean and isotropic latent variance at `(x, fx)`.
    ///
    /// Add `fx` to the mean to get the surrogate's class scores. The variance
    /// is clamped to `[0, 1]`.
    pub fn predict(&self, x: &[f64], fx: &[f64]) -> (Vec<f64>, f64) {
        let k = self.cross_kernel(x, fx);
        let mean = self.weights.tr_mul(&k);
        let solved = self.chol.solve(&k);
        let variance = (1.0 - k.dot(&solved)).clamp(0.0, 1.0);
        (mean.iter().copied().collect(), variance)
    }
}
