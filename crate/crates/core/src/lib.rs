//! Pool-based active learning guided by a Gaussian-process surrogate.
//!
//! The principal learner is retrained only every few labels. In between, a
//! sparse GP over the product kernel tracks the learner's residuals and is
//! updated in `O(K²)` per label, which keeps two utilities cheap to evaluate:
//! an influence term (total predictive-variance reduction over the pool) and
//! a calibrated-entropy term. The two are mixed by a running accuracy
//! estimate.
//!
//! Module map:
//! - [`kernel`]: Gaussian base kernel, input×output product kernel, bandwidth rule.
//! - [`dense_gp`]: exact GP regression, used as a correctness oracle.
//! - [`kmeans`] and [`sparse_gp`]: basis construction and the incremental FITC state.
//! - [`acquisition`]: utilities, calibration, accuracy estimate, combination.
//! - [`learner`]: the principal learner interface and a built-in classifier.
//! - [`driver`]: the selection loop and the baseline strategies.
//! - [`dataset`]: pool/test containers and synthetic generators.

pub mod acquisition;
pub mod dataset;
pub mod dense_gp;
pub mod driver;
mod error;
pub mod kernel;
pub mod kmeans;
pub mod learner;
pub mod linalg;
pub mod rng;
pub mod sparse_gp;

pub use error::{Error, Result};
