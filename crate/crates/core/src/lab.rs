//! Contamination laboratory: clean-data generation and adversarial
//! corruption.
//!
//! Clean samples follow `y_i = x_i^T beta* + xi_i` with subgaussian rows
//! `x_i ~ N(0, Sigma)` and one of several noise laws scaled to variance
//! `sigma^2`. Contamination replaces `o` rows entirely — both covariates
//! and responses may change — while every untouched row stays bit-identical
//! to the clean dataset.
//!
//! Determinism contract: generation and contamination are pure functions of
//! their spec plus a seed. For a fixed seed the row-selection permutation
//! does not depend on the requested `o`, so outlier sets are nested as `o`
//! grows — handy for sweeps that vary contamination on common random
//! numbers.

use ndarray::{Array1, Array2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, GroundTruth};
use crate::error::{Error, Result};
use crate::linalg;

/// Covariance model for the covariate rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CovarianceSpec {
    /// Identity covariance.
    Identity,
    /// Independent coordinates with the given positive variances.
    Diagonal(Vec<f64>),
    /// `Sigma_jk = rho^|j-k|` with `|rho| < 1`.
    Toeplitz { rho: f64 },
}

impl CovarianceSpec {
    /// Builds the `d x d` covariance matrix.
    pub fn materialize(&self, d: usize) -> Result<Array2<f64>> {
        match self {
            CovarianceSpec::Identity => Ok(Array2::eye(d)),
            CovarianceSpec::Diagonal(v) => {
                if v.len() != d {
                    return Err(Error::dim(format!(
                        "diagonal covariance has {} entries but d = {d}",
                        v.len()
                    )));
                }
                if v.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                    return Err(Error::invalid("diagonal covariance entries must be positive"));
                }
                Ok(Array2::from_diag(&Array1::from_vec(v.clone())))
            }
            CovarianceSpec::Toeplitz { rho } => {
                if !(rho.abs() < 1.0) {
                    return Err(Error::invalid(format!("toeplitz rho must satisfy |rho| < 1, got {rho}")));
                }
                Ok(Array2::from_shape_fn((d, d), |(i, j)| {
                    rho.powi((i as i32 - j as i32).abs())
                }))
            }
        }
    }

    /// Largest eigenvalue of the materialized covariance (used when theory
    /// tuning needs the covariance scale).
    pub fn operator_norm(&self, d: usize) -> Result<f64> {
        let sigma = self.materialize(d)?;
        let (lam, _) = linalg::top_eigpair(&sigma, 500, 1e-12);
        Ok(lam)
    }
}

/// Noise law, always scaled so the variance is `sigma^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NoiseSpec {
    Gaussian,
    /// Student t with `df > 2` degrees of freedom (heavier tails, finite
    /// variance).
    StudentT { df: f64 },
    /// `+sigma` or `-sigma` with equal probability.
    Rademacher,
}

impl NoiseSpec {
    fn validate(&self) -> Result<()> {
        if let NoiseSpec::StudentT { df } = self {
            if !(*df > 2.0 && df.is_finite()) {
                return Err(Error::invalid(format!("student-t noise needs df > 2, got {df}")));
            }
        }
        Ok(())
    }

    fn sample(&self, rng: &mut ChaCha8Rng, n: usize, sigma: f64) -> Result<Array1<f64>> {
        self.validate()?;
        let draw: Box<dyn FnMut(&mut ChaCha8Rng) -> f64> = match self {
            NoiseSpec::Gaussian => Box::new(|r: &mut ChaCha8Rng| r.sample(StandardNormal)),
            NoiseSpec::StudentT { df } => {
                let dist = StudentT::new(*df).map_err(|e| Error::invalid(e.to_string()))?;
                let unit_scale = ((df - 2.0) / df).sqrt(); // variance df/(df-2) -> 1
                Box::new(move |r: &mut ChaCha8Rng| dist.sample(r) * unit_scale)
            }
            NoiseSpec::Rademacher => {
                Box::new(|r: &mut ChaCha8Rng| if r.random::<bool>() { 1.0 } else { -1.0 })
            }
        };
        let mut draw = draw;
        Ok(Array1::from_shape_fn(n, |_| sigma * draw(rng)))
    }
}

/// How the true coefficient vector is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BetaSpec {
    /// Use these coefficients verbatim; the nonzero count must equal `s`.
    Fixed(Vec<f64>),
    /// Place `s` nonzeros of size `magnitude` with random signs on a
    /// uniformly random support.
    RandomSupport { magnitude: f64 },
}

/// Full description of a clean dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub n: usize,
    pub d: usize,
    pub s: usize,
    /// Noise standard deviation (zero gives noiseless responses).
    pub sigma: f64,
    /// Subgaussian norm bound recorded in the ground truth.
    pub l: f64,
    pub covariance: CovarianceSpec,
    pub noise: NoiseSpec,
    pub beta: BetaSpec,
    pub seed: u64,
}

impl GeneratorSpec {
    /// Convenience constructor for the common Gaussian-identity setting.
    pub fn gaussian(n: usize, d: usize, s: usize, sigma: f64, magnitude: f64, seed: u64) -> Self {
        GeneratorSpec {
            n,
            d,
            s,
            sigma,
            l: 1.0,
            covariance: CovarianceSpec::Identity,
            noise: NoiseSpec::Gaussian,
            beta: BetaSpec::RandomSupport { magnitude },
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 || self.s == 0 {
            return Err(Error::invalid("n, d, and s must all be positive"));
        }
        if self.d < 3 * self.s {
            return Err(Error::invalid(format!(
                "dimension {} too small for sparsity {}: need d/s >= 3",
                self.d, self.s
            )));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(format!("sigma must be finite and >= 0, got {}", self.sigma)));
        }
        if !(self.l >= 1.0 && self.l.is_finite()) {
            return Err(Error::invalid(format!("subgaussian constant must be >= 1, got {}", self.l)));
        }
        self.noise.validate()?;
        match &self.beta {
            BetaSpec::Fixed(values) => {
                if values.len() != self.d {
                    return Err(Error::dim(format!(
                        "fixed beta has {} entries but d = {}",
                        values.len(),
                        self.d
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("fixed beta".into()));
                }
                let nz = values.iter().filter(|v| **v != 0.0).count();
                if nz != self.s {
                    return Err(Error::invalid(format!(
                        "fixed beta has {nz} nonzeros but s = {}",
                        self.s
                    )));
                }
            }
            BetaSpec::RandomSupport { magnitude } => {
                if !(*magnitude > 0.0 && magnitude.is_finite()) {
                    return Err(Error::invalid(format!("beta magnitude must be positive, got {magnitude}")));
                }
            }
        }
        Ok(())
    }
}

/// Draws a clean dataset and its ground truth.
///
/// RNG order (fixed, part of the determinism contract): coefficients,
/// then covariates row by row, then noise.
pub fn generate_clean(spec: &GeneratorSpec) -> Result<(Dataset, GroundTruth)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (n, d) = (spec.n, spec.d);

    let beta_star = match &spec.beta {
        BetaSpec::Fixed(values) => Array1::from_vec(values.clone()),
        BetaSpec::RandomSupport { magnitude } => {
            let mut idx: Vec<usize> = (0..d).collect();
            let (chosen, _) = idx.partial_shuffle(&mut rng, spec.s);
            let support: Vec<usize> = chosen.to_vec();
            let mut beta = Array1::zeros(d);
            for j in support {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                beta[j] = sign * *magnitude;
            }
            beta
        }
    };

    let sigma_mat = spec.covariance.materialize(d)?;
    let chol = match &spec.covariance {
        CovarianceSpec::Identity => None,
        _ => Some(
            linalg::cholesky(&sigma_mat)
                .ok_or_else(|| Error::invalid("covariance is not positive definite"))?,
        ),
    };

    let mut design = Array2::zeros((n, d));
    let mut z_row = Array1::zeros(d);
    for i in 0..n {
        for j in 0..d {
            z_row[j] = rng.sample::<f64, _>(StandardNormal);
        }
        match &chol {
            None => design.row_mut(i).assign(&z_row),
            Some(l) => design.row_mut(i).assign(&l.dot(&z_row)),
        }
    }

    let noise = spec.noise.sample(&mut rng, n, spec.sigma)?;
    let response = design.dot(&beta_star) + &noise;

    let truth = GroundTruth::new(beta_star, vec![], spec.sigma, sigma_mat, spec.l)?;
    let data = Dataset::new(design, response)?;
    Ok((data, truth))
}

/// Row-replacement strategies. `scale` controls the magnitude of the
/// planted corruption in each case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AttackStrategy {
    /// Shift selected responses by `sqrt(n) * scale`, covariates untouched.
    ResponseShift { scale: f64 },
    /// Replace selected rows by leverage points of norm `scale` along the
    /// true coefficient direction, with responses consistent with
    /// `-beta*` — pulling non-robust fits toward the sign-flipped truth.
    Leverage { scale: f64 },
    /// Add `scale` to the covariate coordinate carrying the largest true
    /// coefficient, leaving responses alone (a targeted measurement bias).
    OracleTilt { scale: f64 },
}

impl AttackStrategy {
    fn scale(&self) -> f64 {
        match self {
            AttackStrategy::ResponseShift { scale }
            | AttackStrategy::Leverage { scale }
            | AttackStrategy::OracleTilt { scale } => *scale,
        }
    }
}

/// Which rows get corrupted and how.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    /// Number of rows to replace.
    pub o: usize,
    pub strategy: AttackStrategy,
    /// Adaptive selection targets the rows with the largest clean signal
    /// `|x_i^T beta*|`; oblivious selection picks rows at random.
    pub adaptive: bool,
}

/// Applies an attack to clean data, returning the corrupted dataset and a
/// ground truth whose `outliers` field records the replaced rows.
pub fn contaminate(
    data: &Dataset,
    truth: &GroundTruth,
    attack: &AttackSpec,
    seed: u64,
) -> Result<(Dataset, GroundTruth)> {
    if !truth.outliers.is_empty() {
        return Err(Error::invalid("refusing to contaminate already-contaminated data"));
    }
    if truth.beta_star.len() != data.d() {
        return Err(Error::dim(format!(
            "ground truth dimension {} does not match data dimension {}",
            truth.beta_star.len(),
            data.d()
        )));
    }
    let scale = attack.strategy.scale();
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(Error::invalid(format!("attack scale must be finite and >= 0, got {scale}")));
    }
    let n = data.n();
    let o = attack.o;
    if o == 0 {
        return Ok((data.clone(), truth.clone()));
    }
    if 2 * o >= n {
        return Err(Error::invalid(format!("attack o = {o} must satisfy o < n/2 (n = {n})")));
    }

    let selected: Vec<usize> = if attack.adaptive {
        // Rank rows by clean signal strength, ties broken by index so the
        // prefix property holds exactly.
        let signal = data.design().dot(&truth.beta_star);
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| {
            signal[b]
                .abs()
                .partial_cmp(&signal[a].abs())
                .unwrap()
                .then(a.cmp(&b))
        });
        idx.into_iter().take(o).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        idx.into_iter().take(o).collect()
    };

    let mut design = data.design().clone();
    let mut response = data.response().clone();
    match &attack.strategy {
        AttackStrategy::ResponseShift { scale } => {
            let shift = (n as f64).sqrt() * scale;
            for &i in &selected {
                response[i] += shift;
            }
        }
        AttackStrategy::Leverage { scale } => {
            let norm = truth.beta_star.dot(&truth.beta_star).sqrt();
            let u = &truth.beta_star / norm;
            for &i in &selected {
                design.row_mut(i).assign(&(&u * *scale));
                response[i] = -scale * norm;
            }
        }
        AttackStrategy::OracleTilt { scale } => {
            let j_star = truth
                .beta_star
                .iter()
                .enumerate()
                .max_by(|(_, a), (_, b)| a.abs().partial_cmp(&b.abs()).unwrap())
                .map(|(j, _)| j)
                .expect("beta_star is non-empty");
            for &i in &selected {
                design[[i, j_star]] += scale;
            }
        }
    }

    let corrupted = Dataset::new(design, response)?;
    let new_truth = GroundTruth::new(
        truth.beta_star.clone(),
        selected,
        truth.sigma,
        truth.covariance.clone(),
        truth.subgaussian_constant,
    )?;
    new_truth.validate_for(n)?;
    Ok((corrupted, new_truth))
}
