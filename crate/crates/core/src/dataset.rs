//! Pool/test containers, the label oracle, and synthetic data.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::rng::{self, stream};
use crate::{Error, Result};

/// Unlabeled pool with hidden labels plus a held-out test split.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub pool: Vec<Vec<f64>>,
    pub pool_labels: Vec<usize>,
    pub test: Vec<Vec<f64>>,
    pub test_labels: Vec<usize>,
    pub num_classes: usize,
}

impl Dataset {
    /// Splits `features` into pool and test by the given test-row indices.
    /// The class count is the largest label plus one.
    pub fn from_rows(features: Vec<Vec<f64>>, labels: Vec<usize>, test_rows: &[usize]) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::DegenerateDataset(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        let Some(dim) = features.first().map(Vec::len) else {
            return Err(Error::DegenerateDataset("no rows".into()));
        };
        if let Some(bad) = features.iter().position(|r| r.len() != dim) {
            return Err(Error::DegenerateDataset(format!(
                "row {bad} has {} features, expected {dim}",
                features[bad].len()
            )));
        }
        let mut is_test = vec![false; features.len()];
        for &r in test_rows {
            if r >= features.len() {
                return Err(Error::DegenerateDataset(format!("test row {r} out of range")));
            }
            is_test[r] = true;
        }
        let num_classes = labels.iter().max().map_or(0, |m| m + 1);

        let mut ds = Self {
            pool: Vec::new(),
            pool_labels: Vec::new(),
            test: Vec::new(),
            test_labels: Vec::new(),
            num_classes,
        };
        for ((row, label), test) in features.into_iter().zip(labels).zip(is_test) {
            if test {
                ds.test.push(row);
                ds.test_labels.push(label);
            } else {
                ds.pool.push(row);
                ds.pool_labels.push(label);
            }
        }
        if ds.pool.is_empty() {
            return Err(Error::DegenerateDataset("every row is in the test split".into()));
        }
        Ok(ds)
    }

    pub fn dim(&self) -> usize {
        self.pool[0].len()
    }

    pub fn pool_size(&self) -> usize {
        self.pool.len()
    }
}

/// Seeded choice of `round(fraction · n)` test rows, sorted.
pub fn random_test_rows(n: usize, fraction: f64, seed: u64) -> Vec<usize> {
    let count = ((n as f64) * fraction.clamp(0.0, 1.0)).round() as usize;
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(&mut rng::substream(seed, stream::SPLIT));
    let mut picked = rows[..count].to_vec();
    picked.sort_unstable();
    picked
}

/// Source of ground-truth labels for selected pool points.
pub trait Oracle {
    fn label(&self, index: usize) -> usize;
}

impl Oracle for Dataset {
    fn label(&self, index: usize) -> usize {
        self.pool_labels[index]
    }
}

impl Oracle for [usize] {
    fn label(&self, index: usize) -> usize {
        self[index]
    }
}

impl Oracle for Vec<usize> {
    fn label(&self, index: usize) -> usize {
        self[index]
    }
}

/// Synthetic classification problems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Synthetic {
    /// Isotropic Gaussian clusters, one per class, centers uniform in
    /// `[-center_box, center_box]^dim`; labels drawn uniformly.
    Blobs {
        classes: usize,
        dim: usize,
        n: usize,
        spread: f64,
        #[serde(default = "default_center_box")]
        center_box: f64,
    },
    /// Two interleaved half circles in the plane with Gaussian noise.
    TwoMoons { n: usize, noise: f64 },
}

fn default_center_box() -> f64 {
    10.0
}

impl Synthetic {
    pub fn generate(&self, seed: u64) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
        let mut rng = rng::substream(seed, stream::DATASET);
        match *self {
            Synthetic::Blobs {
                classes,
                dim,
                n,
                spread,
                center_box,
            } => {
                if classes < 2 || dim == 0 || n == 0 || spread.is_nan() || spread < 0.0 || center_box.is_nan() || center_box <= 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "blobs need classes >= 2, dim >= 1, n >= 1, spread >= 0, center_box > 0 (got {self:?})"
                    )));
                }
                let centers: Vec<Vec<f64>> = (0..classes)
                    .map(|_| (0..dim).map(|_| rng.random_range(-center_box..=center_box)).collect())
                    .collect();
                let mut features = Vec::with_capacity(n);
                let mut labels = Vec::with_capacity(n);
                for _ in 0..n {
                    let c = rng.random_range(0..classes);
                    let row = centers[c]
                        .iter()
                        .map(|&mu| {
                            let z: f64 = StandardNormal.sample(&mut rng);
                            mu + spread * z
                        })
                        .collect();
                    features.push(row);
                    labels.push(c);
                }
                Ok((features, labels))
            }
            Synthetic::TwoMoons { n, noise } => {
                if n == 0 || noise.is_nan() || noise < 0.0 {
                    return Err(Error::InvalidConfig(format!("two moons need n >= 1, noise >= 0 (got {self:?})")));
                }
                let jitter = Normal::new(0.0, noise).expect("validated noise");
                let mut features = Vec::with_capacity(n);
                let mut labels = Vec::with_capacity(n);
                for _ in 0..n {
                    let c = rng.random_range(0..2usize);
                    let angle = rng.random_range(0.0..std::f64::consts::PI);
                    let (x, y) = if c == 0 {
                        (angle.cos(), angle.sin())
                    } else {
                        (1.0 - angle.cos(), 0.5 - angle.sin())
                    };
                    features.push(vec![x + jitter.sample(&mut rng), y + jitter.sample(&mut rng)]);
                    labels.push(c);
                }
                Ok((features, labels))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blobs_are_roughly_balanced() {
        let spec = Synthetic::Blobs {
            classes: 5,
            dim: 3,
            n: 1000,
            spread: 1.0,
            center_box: 10.0,
        };
        let (x, y) = spec.generate(1).unwrap();
        assert_eq!(x.len(), 1000);
        assert!(y.iter().all(|&c| c < 5));
        // Binomial(1000, 0.2): mean 200, sd ~12.65; allow 3 sd.
        let sd = (1000.0f64 * 0.2 * 0.8).sqrt();
        for c in 0..5 {
            let count = y.iter().filter(|&&l| l == c).count() as f64;
            assert!((count - 200.0).abs() <= 3.0 * sd, "class {c}: {count}");
        }
    }

    #[test]
    fn generation_is_seeded() {
        let spec = Synthetic::TwoMoons { n: 50, noise: 0.1 };
        assert_eq!(spec.generate(3).unwrap(), spec.generate(3).unwrap());
        assert_ne!(spec.generate(3).unwrap(), spec.generate(4).unwrap());
        let (x, y) = spec.generate(3).unwrap();
        assert!(x.iter().all(|r| r.len() == 2));
        assert!(y.iter().all(|&c| c < 2));
    }

    #[test]
    fn split_and_class_count() {
        let feats: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let labels = vec![0, 1, 2, 0, 1, 2, 0, 1, 2, 3];
        let ds = Dataset::from_rows(feats, labels, &[0, 9]).unwrap();
        assert_eq!(ds.num_classes, 4);
        assert_eq!(ds.pool_size(), 8);
        assert_eq!(ds.test_labels, vec![0, 3]);
        assert_eq!(ds.label(0), 1);
    }

    #[test]
    fn ragged_rows_rejected() {
        let feats = vec![vec![0.0, 1.0], vec![0.0]];
        assert!(Dataset::from_rows(feats, vec![0, 1], &[]).is_err());
    }

    #[test]
    fn test_rows_are_deterministic() {
        let a = random_test_rows(100, 0.2, 5);
        assert_eq!(a.len(), 20);
        assert_eq!(a, random_test_rows(100, 0.2, 5));
        assert!(a.windows(2).all(|w| w[0] < w[1]));
    }
}
