//! Lloyd's K-means with k-means++ seeding.

use rand::Rng;

use crate::kernel::squared_distance;
use crate::rng::{self, stream};
use crate::{Error, Result};

pub const MAX_ITERATIONS: usize = 100;
pub const TOLERANCE: f64 = 1e-6;

/// Cluster centers of `points`, deterministic given `seed`.
///
/// Stops after [`MAX_ITERATIONS`] rounds or when no center moves by more
/// than [`TOLERANCE`]. A cluster that loses all its members keeps its
/// previous center.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::InvalidConfig(format!(
            "cannot extract {k} centers from {n} points"
        )));
    }
    let dim = points[0].len();
    let mut centers = plus_plus_init(points, k, seed);
    let mut assignment = vec![usize::MAX; n];

    for _ in 0..MAX_ITERATIONS {
        for (slot, p) in assignment.iter_mut().zip(points) {
            *slot = nearest(&centers, p).0;
        }

        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&assignment) {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(p) {
                *s += v;
            }
        }

        let mut max_shift: f64 = 0.0;
        for ((center, sum), &count) in centers.iter_mut().zip(sums).zip(&counts) {
            if count == 0 {
                continue;
            }
            let updated: Vec<f64> = sum.into_iter().map(|s| s / count as f64).collect();
            max_shift = max_shift.max(squared_distance(center, &updated).sqrt());
            *center = updated;
        }
        if max_shift < TOLERANCE {
            break;
        }
    }
    Ok(centers)
}

fn nearest(centers: &[Vec<f64>], p: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = squared_distance(center, p);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_init(points: &[Vec<f64>], k: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut rng = rng::substream(seed, stream::KMEANS);
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centers = vec![points[first].clone()];
    let mut d2: Vec<f64> = points
        .iter()
        .map(|p| squared_distance(p, &centers[0]))
        .collect();

    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                pick = Some(i);
                if target < w {
                    break;
                }
                target -= w;
            }
            pick.expect("positive total weight")
        } else {
            // Every remaining point duplicates a center.
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[pick] = true;
        let center = points[pick].clone();
        for (w, p) in d2.iter_mut().zip(points) {
            *w = w.min(squared_distance(p, &center));
        }
        centers.push(center);
    }
    centers
}
