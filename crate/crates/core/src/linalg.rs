//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::{Error, Result};

/// Extra diagonal added on the single retry after a failed factorization.
pub const RETRY_JITTER: f64 = 1e-8;

/// Cholesky of `a + jitter·I`, retrying once with `jitter + RETRY_JITTER`.
///
/// Returns the factor and the jitter that succeeded.
pub fn cholesky_with_retry(a: &DMatrix<f64>, jitter: f64) -> Result<(Cholesky<f64, Dyn>, f64)> {
    for extra in [jitter, jitter + RETRY_JITTER] {
        let mut m = a.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += extra;
        }
        if let Some(chol) = Cholesky::new(m) {
            return Ok((chol, extra));
        }
    }
    Err(Error::NotPositiveDefinite)
}

/// Makes `m` exactly symmetric by averaging with its transpose.
pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// `||a - b||_F / ||b||_F`.
pub fn relative_frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

/// `xᵀ A x`.
#[inline]
pub fn quadratic_form(a: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    x.dot(&(a * x))
}

/// Index of the largest entry; ties go to the lowest index and NaN never wins.
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}
