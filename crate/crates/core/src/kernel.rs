//! Gaussian kernels over inputs and learner outputs.
//!
//! The surrogate's prior couples a feature-space kernel with a kernel on the
//! learner's class-probability vectors, so points the learner separates stay
//! apart in the surrogate even when their features are close.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{self, stream};
use crate::{Error, Result};

/// Pair budget for the bandwidth estimate on large pools.
pub const DEFAULT_MAX_PAIRS: usize = 100_000;

/// Default likelihood noise variance.
pub const DEFAULT_NOISE_VARIANCE: f64 = 1e-10;

/// Bandwidths and noise for the product kernel.
///
/// `sigma_x` and `sigma_f` enter squared as the kernel denominators.
/// With `output_kernel` off the kernel reduces to the input factor alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub sigma_x: f64,
    pub sigma_f: f64,
    pub noise_variance: f64,
    pub output_kernel: bool,
}

impl KernelParams {
    pub fn new(sigma_x: f64, sigma_f: f64, noise_variance: f64) -> Result<Self> {
        let params = Self {
            sigma_x,
            sigma_f,
            noise_variance,
            output_kernel: true,
        };
        params.validate()?;
        Ok(params)
    }

    /// Data-driven defaults: `sigma_x` is half the mean pairwise distance,
    /// `sigma_f` is the class count.
    pub fn from_data(features: &[Vec<f64>], num_classes: usize, seed: u64) -> Result<Self> {
        let sigma_x = estimate_sigma_x(features, DEFAULT_MAX_PAIRS, seed)?;
        Self::new(sigma_x, num_classes as f64, DEFAULT_NOISE_VARIANCE)
    }

    /// Same bandwidths with the output factor switched off.
    pub fn input_only(self) -> Self {
        Self {
            output_kernel: false,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.sigma_x) || !ok(self.sigma_f) || !ok(self.noise_variance) {
            return Err(Error::InvalidConfig(format!(
                "kernel parameters must be positive and finite (sigma_x={}, sigma_f={}, noise={})",
                self.sigma_x, self.sigma_f, self.noise_variance
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn input_denominator(&self) -> f64 {
        self.sigma_x * self.sigma_x
    }

    #[inline]
    pub fn output_denominator(&self) -> f64 {
        self.sigma_f * self.sigma_f
    }

    /// Input factor `exp(-||x-x'||² / sigma_x²)`.
    #[inline]
    pub fn input_kernel(&self, x: &[f64], x_prime: &[f64]) -> f64 {
        gaussian_base(x, x_prime, self.input_denominator())
    }

    /// Output factor, identically 1 when the output kernel is disabled.
    #[inline]
    pub fn output_kernel(&self, fx: &[f64], fx_prime: &[f64]) -> f64 {
        if self.output_kernel {
            gaussian_base(fx, fx_prime, self.output_denominator())
        } else {
            1.0
        }
    }
}

/// How `sigma_f` follows the class count `C`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputWidthRule {
    /// `sigma_f = C`, so the output denominator is `C²`.
    #[default]
    ClassCount,
    /// `sigma_f = √C`, so the output denominator is `C`.
    SqrtClassCount,
}

/// Kernel configuration before it meets a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSettings {
    /// Fixed input bandwidth; estimated from the pool when absent.
    pub sigma_x: Option<f64>,
    pub sigma_x_multiplier: f64,
    pub sigma_f_rule: OutputWidthRule,
    pub sigma_f_multiplier: f64,
    pub noise_variance: f64,
    pub output_kernel: bool,
}

impl Default for KernelSettings {
    fn default() -> Self {
        Self {
            sigma_x: None,
            sigma_x_multiplier: 1.0,
            sigma_f_rule: OutputWidthRule::ClassCount,
            sigma_f_multiplier: 1.0,
            noise_variance: DEFAULT_NOISE_VARIANCE,
            output_kernel: true,
        }
    }
}

impl KernelSettings {
    pub fn resolve(&self, features: &[Vec<f64>], num_classes: usize, seed: u64) -> Result<KernelParams> {
        let sigma_x = match self.sigma_x {
            Some(s) => s,
            None => estimate_sigma_x(features, DEFAULT_MAX_PAIRS, seed)?,
        } * self.sigma_x_multiplier;
        let classes = num_classes as f64;
        let sigma_f = match self.sigma_f_rule {
            OutputWidthRule::ClassCount => classes,
            OutputWidthRule::SqrtClassCount => classes.sqrt(),
        } * self.sigma_f_multiplier;
        let mut params = KernelParams::new(sigma_x, sigma_f, self.noise_variance)?;
        params.output_kernel = self.output_kernel;
        Ok(params)
    }
}

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dimension mismatch");
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// `exp(-||a - a'||² / b)`.
///
/// Panics on a dimension mismatch or a non-positive `b`.
#[inline]
pub fn gaussian_base(a: &[f64], a_prime: &[f64], b: f64) -> f64 {
    assert!(b > 0.0, "kernel width must be positive, got {b}");
    (-squared_distance(a, a_prime) / b).exp()
}

/// Input kernel times output kernel.
#[inline]
pub fn product_kernel(
    x: &[f64],
    x_prime: &[f64],
    fx: &[f64],
    fx_prime: &[f64],
    params: &KernelParams,
) -> f64 {
    params.input_kernel(x, x_prime) * params.output_kernel(fx, fx_prime)
}

/// Half the mean Euclidean distance between rows of `features`.
///
/// Uses every pair when there are at most `max_pairs` of them, otherwise a
/// seeded sample of `max_pairs` distinct pairs.
pub fn estimate_sigma_x(features: &[Vec<f64>], max_pairs: usize, seed: u64) -> Result<f64> {
    let n = features.len();
    if n < 2 {
        return Err(Error::DegenerateDataset(format!(
            "need at least 2 rows to estimate a bandwidth, got {n}"
        )));
    }
    let total_pairs = n * (n - 1) / 2;
    let dist = |i: usize, j: usize| squared_distance(&features[i], &features[j]).sqrt();

    let mean = if total_pairs <= max_pairs.max(1) {
        let mut sum = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                sum += dist(i, j);
            }
        }
        sum / total_pairs as f64
    } else {
        let mut rng = rng::substream(seed, stream::BANDWIDTH);
        let mut seen = HashSet::with_capacity(max_pairs);
        let mut sum = 0.0;
        while seen.len() < max_pairs {
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            if i == j {
                continue;
            }
            let key = (i.min(j), i.max(j));
            if seen.insert(key) {
                sum += dist(key.0, key.1);
            }
        }
        sum / max_pairs as f64
    };

    let sigma = 0.5 * mean;
    if sigma <= 0.0 {
        return Err(Error::ZeroBandwidth);
    }
    Ok(sigma)
}
