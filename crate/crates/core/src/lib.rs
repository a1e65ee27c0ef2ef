//! Outlier-robust estimation of sparse linear regression coefficients.
//!
//! The estimation pipeline has three stages:
//!
//! 1. **Adversarial reweighting** ([`saddle::solve_weights`]): solve a
//!    bilinear min-max problem over the capped probability simplex and a
//!    bounded set of symmetric PSD matrices. The optimal value certifies
//!    how far the weighted second-moment structure of the covariates is
//!    from its nominal target; runs whose certificate exceeds a cutoff are
//!    flagged as failed.
//! 2. **Truncation** ([`weights::truncate_weights`]): snap the solved
//!    weights to `{0, 1/n}`, discarding samples the adversarial weighting
//!    down-weighted below `1/(2n)`.
//! 3. **Weighted Huber regression** ([`regression::fit_penalized_huber`]):
//!    an l1-penalized Huber M-estimator over the retained samples.
//!
//! Around the estimator proper, the crate provides a contamination
//! laboratory ([`lab`]) for generating clean and adversarially corrupted
//! datasets, tuning rules ([`tuning`]) in both theory-driven and practical
//! flavors, non-robust baselines ([`baselines`]), and an experiment driver
//! ([`pipeline`]) with plain-text dataset and result formats ([`io`]).

pub mod baselines;
pub mod data;
pub mod error;
pub mod huber;
pub mod io;
pub mod lab;
pub(crate) mod linalg;
pub mod matrix_set;
pub mod pipeline;
pub mod rates;
pub mod regression;
pub mod saddle;
pub mod tuning;
pub mod weights;

pub use data::{Dataset, GroundTruth};
pub use error::{Error, Result};
pub use rates::RateTerms;
pub use tuning::TuningParams;
