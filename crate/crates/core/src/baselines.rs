//! Non-robust reference estimators: the lasso and an unweighted penalized
//! Huber regression. Both reuse the proximal engine from [`crate::regression`]
//! so solver behavior (monotone trace, KKT stopping) is identical across
//! estimators.

use ndarray::Array1;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::regression::{fista_l1, fit_penalized_huber, FitOptions, HuberFitResult};
use crate::weights::TruncatedWeights;

/// l1-penalized least squares: `min_beta ||y - X beta||^2 / (2n) + lambda_s ||beta||_1`.
pub fn fit_lasso(data: &Dataset, lambda_s: f64, opts: &FitOptions) -> Result<HuberFitResult> {
    if !(lambda_s >= 0.0 && lambda_s.is_finite()) {
        return Err(Error::invalid(format!("lambda_s must be nonnegative and finite, got {lambda_s}")));
    }
    let n = data.n() as f64;
    let x = data.design();
    let y = data.response();
    let gram = x.t().dot(x) / n;
    let (lip0, _) = crate::linalg::top_eigpair(&gram, 300, 1e-10);
    let f = |beta: &Array1<f64>| -> f64 {
        let r = y - &x.dot(beta);
        r.dot(&r) / (2.0 * n)
    };
    let g = |beta: &Array1<f64>| -> Array1<f64> {
        let r = y - &x.dot(beta);
        -x.t().dot(&r) / n
    };
    Ok(fista_l1(data.d(), lambda_s, lip0, f, g, opts))
}

/// Penalized Huber regression with uniform weights `1/n` on every row,
/// i.e. the estimation stage of the pipeline without the reweighting.
pub fn fit_huber_unweighted(
    data: &Dataset,
    lambda_o: f64,
    lambda_s: f64,
    opts: &FitOptions,
) -> Result<HuberFitResult> {
    fit_penalized_huber(data, &TruncatedWeights::uniform(data.n()), lambda_o, lambda_s, opts)
}
