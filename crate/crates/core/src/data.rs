//! Dataset and ground-truth containers.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// A regression sample: design matrix `X` (one row per observation) and
/// response vector `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    design: Array2<f64>,
    response: Array1<f64>,
}

impl Dataset {
    /// Builds a dataset, checking that shapes line up and all entries are
    /// finite.
    pub fn new(design: Array2<f64>, response: Array1<f64>) -> Result<Self> {
        if design.nrows() != response.len() {
            return Err(Error::dim(format!(
                "design has {} rows but response has {} entries",
                design.nrows(),
                response.len()
            )));
        }
        if design.nrows() == 0 {
            return Err(Error::invalid("dataset must contain at least one sample"));
        }
        if design.ncols() == 0 {
            return Err(Error::invalid("design must have at least one column"));
        }
        if design.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("design matrix".into()));
        }
        if response.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("response vector".into()));
        }
        Ok(Dataset { design, response })
    }

    /// Number of samples.
    pub fn n(&self) -> usize {
        self.design.nrows()
    }

    /// Number of covariates.
    pub fn d(&self) -> usize {
        self.design.ncols()
    }

    pub fn design(&self) -> &Array2<f64> {
        &self.design
    }

    pub fn response(&self) -> &Array1<f64> {
        &self.response
    }

    /// Residual vector `y - X beta`.
    pub fn residuals(&self, beta: &Array1<f64>) -> Array1<f64> {
        &self.response - &self.design.dot(beta)
    }
}

/// Everything the contamination lab knows about how a dataset was made.
///
/// `support` is exactly the set of nonzero coordinates of `beta_star`, and
/// `outliers` lists the rows that were replaced by the adversary (empty for
/// clean data). Both are kept sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub beta_star: Array1<f64>,
    pub support: Vec<usize>,
    pub outliers: Vec<usize>,
    pub sigma: f64,
    pub covariance: Array2<f64>,
    pub subgaussian_constant: f64,
}

impl GroundTruth {
    /// Builds a ground truth record, deriving the support from `beta_star`
    /// and validating the sparsity and contamination bookkeeping.
    pub fn new(
        beta_star: Array1<f64>,
        mut outliers: Vec<usize>,
        sigma: f64,
        covariance: Array2<f64>,
        subgaussian_constant: f64,
    ) -> Result<Self> {
        let d = beta_star.len();
        if beta_star.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("beta_star".into()));
        }
        let support: Vec<usize> = (0..d).filter(|&j| beta_star[j] != 0.0).collect();
        let s = support.len();
        if s == 0 {
            return Err(Error::invalid("beta_star must have at least one nonzero"));
        }
        if (d as f64) < 3.0 * s as f64 {
            return Err(Error::invalid(format!(
                "dimension {d} too small for sparsity {s}: need d/s >= 3"
            )));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!("sigma must be finite and >= 0, got {sigma}")));
        }
        if !(subgaussian_constant >= 1.0 && subgaussian_constant.is_finite()) {
            return Err(Error::invalid(format!(
                "subgaussian constant must be finite and >= 1, got {subgaussian_constant}"
            )));
        }
        if covariance.nrows() != d || covariance.ncols() != d {
            return Err(Error::dim(format!(
                "covariance is {}x{} but beta_star has dimension {d}",
                covariance.nrows(),
                covariance.ncols()
            )));
        }
        let asym = covariance
            .iter()
            .zip(covariance.t().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        if !(asym <= 1e-10) {
            return Err(Error::invalid(format!("covariance not symmetric (skew {asym:.3e})")));
        }
        outliers.sort_unstable();
        outliers.dedup();
        Ok(GroundTruth {
            beta_star,
            support,
            outliers,
            sigma,
            covariance,
            subgaussian_constant,
        })
    }

    /// Sparsity `s` of the true coefficient vector.
    pub fn s(&self) -> usize {
        self.support.len()
    }

    /// Number of contaminated rows `o`.
    pub fn o(&self) -> usize {
        self.outliers.len()
    }

    /// Checks that the recorded outlier indices address rows of a dataset
    /// with `n` samples and that fewer than half the rows are corrupted.
    pub fn validate_for(&self, n: usize) -> Result<()> {
        if let Some(&bad) = self.outliers.iter().find(|&&i| i >= n) {
            return Err(Error::invalid(format!(
                "outlier index {bad} out of range for n = {n}"
            )));
        }
        if 2 * self.o() >= n && self.o() > 0 {
            return Err(Error::invalid(format!(
                "contamination o = {} must satisfy o < n/2 (n = {n})",
                self.o()
            )));
        }
        Ok(())
    }

    /// l2 distance between an estimate and the true coefficients.
    pub fn l2_error(&self, beta_hat: &Array1<f64>) -> f64 {
        (beta_hat - &self.beta_star).mapv(|v| v * v).sum().sqrt()
    }

    /// l1 distance between an estimate and the true coefficients.
    pub fn l1_error(&self, beta_hat: &Array1<f64>) -> f64 {
        (beta_hat - &self.beta_star).mapv(f64::abs).sum()
    }
}
