//! Tuning rules for the pipeline's six parameters: the Huber scale
//! `lambda_o`, the l1 penalty `lambda_s`, the simplex cap parameter `eps`,
//! the acceptance cutoff `tau_cut`, and the matrix-set radii `r1`, `r2`.
//!
//! Two flavors are provided:
//!
//! - **Theory-driven** ([`theory_params_known`], [`theory_params_unknown`]):
//!   the closed-form settings under which the estimator's guarantees hold,
//!   parameterized by the numerical constants collected in
//!   [`TuningConstants`]. These need population quantities (noise scale,
//!   subgaussian norm bound, covariance scale) that experiments rarely
//!   know, so the functions also report which validity conditions the
//!   resulting configuration satisfies.
//! - **Practical** ([`practical_params`]): plug-in rules driven by a pilot
//!   lasso fit: a robust noise scale from residual MAD, a sparsity guess
//!   from the pilot support, unit-scale radii, and a cutoff calibrated by a
//!   robust covariate second-moment estimate.

use ndarray::{Array1, Axis};
use serde::{Deserialize, Serialize};

use crate::baselines::{fit_huber_unweighted, fit_lasso};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rates::{rate_terms, RateTerms};
use crate::regression::FitOptions;

/// Numerical constants in the theory-driven rules, set to the smallest
/// values for which the guarantees are stated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningConstants {
    /// Lower-bound constant in the `lambda_o` validity condition.
    pub c_o: f64,
    /// Multiplier of the l1 penalty.
    pub c_s: f64,
    /// Multiplier mapping the contamination fraction to `eps` (in `[1, 2)`).
    pub c_eps: f64,
    /// Multiplier of the acceptance cutoff.
    pub c_cut: f64,
    /// Multiplier of `r1` relative to `sqrt(s) r2`.
    pub c_r1: f64,
    /// Multiplier of the `r2` radius.
    pub c_r2: f64,
    /// Moment-equivalence constant of the covariate distribution.
    pub c_max: f64,
    /// Multiplier in `lambda_o sqrt(n) = c_lambda L^2 sigma`.
    pub c_lambda: f64,
}

impl Default for TuningConstants {
    fn default() -> Self {
        TuningConstants {
            c_o: 50.0,
            c_s: 24.0,
            c_eps: 1.0,
            c_cut: 1.0,
            c_r1: 5.0,
            c_r2: 150.0,
            c_max: 1.0,
            c_lambda: 24.0,
        }
    }
}

/// The six tuning parameters consumed by the weight solver and the
/// regression stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningParams {
    pub lambda_o: f64,
    pub lambda_s: f64,
    pub eps: f64,
    pub tau_cut: f64,
    pub r1: f64,
    pub r2: f64,
}

impl TuningParams {
    /// Builds a parameter set, rejecting out-of-range values.
    pub fn new(
        lambda_o: f64,
        lambda_s: f64,
        eps: f64,
        tau_cut: f64,
        r1: f64,
        r2: f64,
    ) -> Result<Self> {
        let p = TuningParams { lambda_o, lambda_s, eps, tau_cut, r1, r2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_o > 0.0 && self.lambda_o.is_finite()) {
            return Err(Error::invalid(format!("lambda_o must be positive, got {}", self.lambda_o)));
        }
        if !(self.lambda_s >= 0.0 && self.lambda_s.is_finite()) {
            return Err(Error::invalid(format!("lambda_s must be nonnegative, got {}", self.lambda_s)));
        }
        if !(self.eps >= 0.0 && self.eps < 1.0) {
            return Err(Error::invalid(format!("eps must lie in [0, 1), got {}", self.eps)));
        }
        if !(self.tau_cut >= 0.0 && self.tau_cut.is_finite()) {
            return Err(Error::invalid(format!("tau_cut must be nonnegative, got {}", self.tau_cut)));
        }
        if !(self.r1 > 0.0 && self.r1.is_finite() && self.r2 > 0.0 && self.r2.is_finite()) {
            return Err(Error::invalid(format!("radii must be positive, got r1 = {}, r2 = {}", self.r1, self.r2)));
        }
        Ok(())
    }
}

/// Which validity conditions a theory-driven configuration satisfies. The
/// parameters are returned either way; this report tells the caller whether
/// the guarantees formally apply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    /// `lambda_o sqrt(n) >= c_o L Sigma_max r2 sqrt(1 + log L)`.
    pub lambda_o_ok: bool,
    /// `max(r_d r1^2, r2, s r_d) <= 1`.
    pub side_condition_ok: bool,
    /// Contamination fraction below the regime bound (`1/(5e)` with known
    /// covariance, `1/2` otherwise).
    pub contamination_ok: bool,
    /// Sample-size requirement (`n >= s^2 log(d/s)`; trivial in the
    /// known-covariance case).
    pub sample_size_ok: bool,
}

impl ValidityReport {
    pub fn all_ok(&self) -> bool {
        self.lambda_o_ok && self.side_condition_ok && self.contamination_ok && self.sample_size_ok
    }
}

/// Shared scalar inputs of the theory rules.
struct TheoryInputs {
    n: f64,
    sigma: f64,
    l: f64,
    sigma_max: f64,
    r_frak: f64,
}

fn check_theory_inputs(
    n: usize,
    sigma: f64,
    l: f64,
    sigma_max: f64,
    r_frak: f64,
) -> Result<TheoryInputs> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("noise scale sigma must be positive, got {sigma}")));
    }
    if !(l >= 1.0 && l.is_finite()) {
        return Err(Error::invalid(format!("subgaussian constant must be >= 1, got {l}")));
    }
    if !(sigma_max > 0.0 && sigma_max.is_finite()) {
        return Err(Error::invalid(format!("sigma_max must be positive, got {sigma_max}")));
    }
    if !(r_frak > 0.0 && r_frak.is_finite()) {
        return Err(Error::invalid(format!("restricted eigenvalue scale must be positive, got {r_frak}")));
    }
    Ok(TheoryInputs { n: n as f64, sigma, l, sigma_max, r_frak })
}

/// Theory-driven parameters when the covariate covariance is known to the
/// weight solver (the centered objective is used).
#[allow(clippy::too_many_arguments)]
pub fn theory_params_known(
    n: usize,
    d: usize,
    s: usize,
    o: usize,
    delta: f64,
    sigma: f64,
    l: f64,
    sigma_max: f64,
    r_frak: f64,
    constants: &TuningConstants,
) -> Result<(TuningParams, ValidityReport)> {
    let rates = rate_terms(n, d, s, o, delta)?;
    let inp = check_theory_inputs(n, sigma, l, sigma_max, r_frak)?;
    let c = constants;
    let o_frac = o as f64 / inp.n;
    let sf = s as f64;

    let lambda_o_sqrt_n = c.c_lambda * inp.l * inp.l * inp.sigma;
    let bracket = sf.sqrt() * rates.r_d
        + rates.r_delta
        + rates.r_o
        + o_frac.sqrt() * (sf * rates.r_d).sqrt();
    let r2 = c.c_r2 * c.c_max.powi(3) * inp.l * (inp.sigma_max / (inp.r_frak * inp.r_frak))
        * lambda_o_sqrt_n
        * bracket;
    let r1 = c.c_r1 * sf.sqrt() * r2;
    let lambda_s = c.c_s * c.c_max.powi(2) * inp.l * inp.sigma_max * lambda_o_sqrt_n
        * (rates.r_d + (rates.r_delta + rates.r_o) / sf.sqrt() + o_frac.sqrt() * rates.r_d.sqrt());
    let eps = c.c_eps * o_frac;
    if eps >= 1.0 {
        return Err(Error::invalid(format!("eps = c_eps * o/n = {eps} leaves the capped simplex empty")));
    }
    let tau_cut = c.c_cut * (inp.l * inp.sigma_max).powi(2)
        * (rates.r_d * r1 * r1 + (rates.r_delta + rates.r_o_prime) * r2 * r2);

    let params = TuningParams::new(lambda_o_sqrt_n / inp.n.sqrt(), lambda_s, eps, tau_cut, r1, r2)?;
    let report = ValidityReport {
        lambda_o_ok: lambda_o_sqrt_n
            >= c.c_o * inp.l * inp.sigma_max * r2 * (1.0 + inp.l.ln()).sqrt() - 1e-12,
        side_condition_ok: (rates.r_d * r1 * r1).max(r2).max(sf * rates.r_d) <= 1.0,
        contamination_ok: o_frac <= 1.0 / (5.0 * std::f64::consts::E),
        sample_size_ok: true,
    };
    Ok((params, report))
}

/// Theory-driven parameters when the covariance is unknown (the solver
/// uses the uncentered objective).
#[allow(clippy::too_many_arguments)]
pub fn theory_params_unknown(
    n: usize,
    d: usize,
    s: usize,
    o: usize,
    delta: f64,
    sigma: f64,
    l: f64,
    sigma_max: f64,
    r_frak: f64,
    constants: &TuningConstants,
) -> Result<(TuningParams, ValidityReport)> {
    let rates = rate_terms(n, d, s, o, delta)?;
    let inp = check_theory_inputs(n, sigma, l, sigma_max, r_frak)?;
    let c = constants;
    let o_frac = o as f64 / inp.n;
    let sf = s as f64;

    let lambda_o_sqrt_n = c.c_lambda * inp.l * inp.l * inp.sigma;
    let bracket = sf.sqrt() * rates.r_d + rates.r_delta + o_frac.sqrt();
    let r2 = c.c_r2 * c.c_max.powi(3) * inp.l * (inp.sigma_max / (inp.r_frak * inp.r_frak))
        * lambda_o_sqrt_n
        * bracket;
    let r1 = c.c_r1 * sf.sqrt() * r2;
    let lambda_s = c.c_s * c.c_max.powi(2) * inp.l * inp.sigma_max * lambda_o_sqrt_n
        * (rates.r_d + (rates.r_delta + o_frac.sqrt()) / sf.sqrt());
    let eps = c.c_eps * o_frac;
    if eps >= 1.0 {
        return Err(Error::invalid(format!("eps = c_eps * o/n = {eps} leaves the capped simplex empty")));
    }
    let tau_cut =
        c.c_cut * (inp.l * inp.sigma_max).powi(2) * (rates.r_d * r1 * r1 + r2 * r2);

    let params = TuningParams::new(lambda_o_sqrt_n / inp.n.sqrt(), lambda_s, eps, tau_cut, r1, r2)?;
    let report = ValidityReport {
        lambda_o_ok: lambda_o_sqrt_n
            >= c.c_o * inp.l * inp.sigma_max * r2 * (1.0 + inp.l.ln()).sqrt() - 1e-12,
        side_condition_ok: (rates.r_d * r1 * r1).max(r2).max(sf * rates.r_d) <= 1.0,
        contamination_ok: o_frac <= 0.5,
        sample_size_ok: inp.n >= sf * sf * (d as f64 / sf).ln(),
    };
    Ok((params, report))
}

/// Options for the pilot-based practical rule.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PilotOptions {
    /// Assumed number of contaminated rows (the budget `o-hat`).
    pub outlier_budget: usize,
    /// Confidence level entering the rate terms.
    pub delta: f64,
    /// Multiplier on the robust noise scale in the Huber transition
    /// `lambda_o sqrt(n) = 2 sigma-hat * quantile_knob`; residuals beyond
    /// roughly `2 * knob` robust standard deviations are treated linearly.
    pub quantile_knob: f64,
    /// Multiplier mapping the budget fraction to `eps`.
    pub c_eps: f64,
    /// Multiplier of the acceptance cutoff.
    pub c_cut: f64,
    /// Multiplier of `r1` relative to `sqrt(s-hat) r2`.
    pub c_r1: f64,
    /// Restrict the pilot fit and scale estimates to these rows (used to
    /// re-tune after truncation has removed suspect rows).
    pub retained: Option<Vec<usize>>,
}

impl Default for PilotOptions {
    fn default() -> Self {
        PilotOptions {
            outlier_budget: 0,
            delta: 0.1,
            quantile_knob: 3.0,
            c_eps: 1.0,
            c_cut: 1.0,
            c_r1: 5.0,
            retained: None,
        }
    }
}

/// Practical parameters plus the pilot quantities they were derived from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PracticalTuning {
    pub params: TuningParams,
    /// Robust noise scale (MAD of pilot residuals, normal-consistent).
    pub sigma_hat: f64,
    /// Sparsity guess from the pilot support, clamped to `[1, d/3]`.
    pub s_hat: usize,
    /// Robust covariate scale: `median_i ||X_i||^2 / d`.
    pub sigma_max_hat: f64,
    pub rates: RateTerms,
}

fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty());
    values.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

/// Normal-consistent median absolute deviation about the median.
fn mad(values: &Array1<f64>) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    let med = median(&mut v);
    let mut dev: Vec<f64> = values.iter().map(|x| (x - med).abs()).collect();
    1.4826 * median(&mut dev)
}

/// Pilot-based tuning: noise scale from the residual MAD around a pilot fit
/// (an iterated lasso for support discovery, then an unpenalized refit on
/// that support for the scale), sparsity from the pilot support, unit radii,
/// and a cutoff calibrated by the median covariate row norm.
pub fn practical_params(data: &Dataset, opts: &PilotOptions) -> Result<PracticalTuning> {
    if !(opts.delta > 0.0 && opts.delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0,1), got {}", opts.delta)));
    }
    if !(opts.quantile_knob > 0.0 && opts.quantile_knob.is_finite()) {
        return Err(Error::invalid(format!("quantile_knob must be positive, got {}", opts.quantile_knob)));
    }
    let n = data.n();
    let d = data.d();
    if opts.outlier_budget * 2 >= n && opts.outlier_budget > 0 {
        return Err(Error::invalid(format!(
            "outlier budget {} must be below n/2 = {}",
            opts.outlier_budget,
            n / 2
        )));
    }

    // Work on the pilot subset (all rows, or the retained rows after a
    // weight-solve pass).
    let (x_p, y_p) = match &opts.retained {
        None => (data.design().clone(), data.response().clone()),
        Some(rows) => {
            if rows.is_empty() {
                return Err(Error::NoRetainedSamples);
            }
            if let Some(&bad) = rows.iter().find(|&&i| i >= n) {
                return Err(Error::invalid(format!("retained index {bad} out of range")));
            }
            (data.design().select(Axis(0), rows), data.response().select(Axis(0), rows))
        }
    };
    let n_p = x_p.nrows();
    let pilot_data = Dataset::new(x_p.clone(), y_p.clone())?;

    // Initial scale from the response alone, floored to keep the pilot
    // penalty well-defined on (near-)noiseless data.
    let y_scale = y_p.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1.0);
    let floor = 1e-10 * y_scale;
    let pilot_opts = FitOptions { max_iter: 3000, tol: 1e-5, ..FitOptions::default() };

    // Iterated pilot: each pass re-derives the penalty from the current
    // residual scale. The first pass starts from the response scale, so
    // its penalty over-shrinks and signal leaks into the residuals; the
    // leak decays geometrically across passes.
    let mut sigma_hat = mad(&y_p).max(floor);
    let mut pilot = None;
    for _ in 0..3 {
        let lambda_pilot = 2.0 * sigma_hat * ((d as f64).ln() / n_p as f64).sqrt();
        let fit = fit_lasso(&pilot_data, lambda_pilot, &pilot_opts)?;
        let resid = &y_p - &x_p.dot(&fit.beta_hat);
        sigma_hat = mad(&resid).max(floor);
        pilot = Some(fit);
    }
    let pilot = pilot.expect("pilot loop runs at least once");

    // The l1 pilot's shrinkage leaks signal into its residuals (each active
    // coefficient is biased toward zero by roughly its penalty), so the MAD
    // above settles at an inflated fixed point when d/n is not small. For
    // the final scale, refit without the l1 penalty on the pilot's support
    // and take the MAD of those residuals instead. The refit keeps the
    // bounded-score loss so corrupted rows cannot drag it the way least
    // squares would.
    let mut support_idx: Vec<usize> = (0..d).filter(|&j| pilot.beta_hat[j] != 0.0).collect();
    let k_max = (n_p / 3).max(1);
    if support_idx.len() > k_max {
        support_idx.sort_by(|&a, &b| {
            pilot.beta_hat[b].abs().partial_cmp(&pilot.beta_hat[a].abs()).unwrap()
        });
        support_idx.truncate(k_max);
        support_idx.sort_unstable();
    }
    if !support_idx.is_empty() {
        let x_s = x_p.select(Axis(1), &support_idx);
        let sub = Dataset::new(x_s.clone(), y_p.clone())?;
        let lambda_o_refit = 2.0 * sigma_hat * opts.quantile_knob / (n_p as f64).sqrt();
        let refit = fit_huber_unweighted(&sub, lambda_o_refit, 0.0, &pilot_opts)?;
        let resid = &y_p - &x_s.dot(&refit.beta_hat);
        sigma_hat = mad(&resid).max(floor);
    }

    let support = pilot.beta_hat.iter().filter(|v| **v != 0.0).count();
    let s_hat = support.clamp(1, (d / 3).max(1));

    let rates = rate_terms(n, d, s_hat, opts.outlier_budget, opts.delta)?;
    let nf = n as f64;
    let lambda_o = 2.0 * sigma_hat * opts.quantile_knob / nf.sqrt();
    let lambda_s = 2.0 * sigma_hat * ((d as f64).ln() / nf).sqrt();
    let eps = (opts.c_eps * opts.outlier_budget as f64 / nf).min(0.49);
    let r2 = 1.0;
    let r1 = opts.c_r1 * (s_hat as f64).sqrt() * r2;

    let mut row_norms: Vec<f64> =
        data.design().rows().into_iter().map(|r| r.dot(&r) / d as f64).collect();
    let sigma_max_hat = median(&mut row_norms).max(1e-12);
    let tau_cut = opts.c_cut * sigma_max_hat * sigma_max_hat * (rates.r_d * r1 * r1 + r2 * r2);

    Ok(PracticalTuning {
        params: TuningParams::new(lambda_o, lambda_s, eps, tau_cut, r1, r2)?,
        sigma_hat,
        s_hat,
        sigma_max_hat,
        rates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use ndarray::Array2;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    const REL: f64 = 1e-12;

    #[test]
    fn known_covariance_rule_matches_frozen_values() {
        // Reference values computed independently and frozen: n = 1e4,
        // d = 300, s = 3, o = 10, delta = 0.1, sigma = L = Sigma_max =
        // r_frak = 1, default constants.
        let (p, report) = theory_params_known(
            10_000, 300, 3, 10, 0.1, 1.0, 1.0, 1.0, 1.0, &TuningConstants::default(),
        )
        .unwrap();
        assert_relative_eq!(p.lambda_o, 0.24, max_relative = REL);
        assert_relative_eq!(p.r2, 226.78345945767583, max_relative = REL);
        assert_relative_eq!(p.r1, 1964.0023704846556, max_relative = REL);
        assert_relative_eq!(p.lambda_s, 20.949358618502998, max_relative = REL);
        assert_abs_diff_eq!(p.eps, 0.001, epsilon = 1e-15);
        assert_relative_eq!(p.tau_cut, 83912.156421867825, max_relative = REL);
        // At sigma = 1 the radii are far above 1, so the side condition
        // fails while the contamination fraction is fine.
        assert!(!report.side_condition_ok);
        assert!(report.contamination_ok);
        assert!(report.sample_size_ok);
        assert!(!report.all_ok());
    }

    #[test]
    fn unknown_covariance_rule_matches_frozen_values() {
        let (p, report) = theory_params_unknown(
            10_000, 300, 3, 10, 0.1, 1.0, 1.0, 1.0, 1.0, &TuningConstants::default(),
        )
        .unwrap();
        assert_relative_eq!(p.lambda_o, 0.24, max_relative = REL);
        assert_relative_eq!(p.r2, 302.27857122252112, max_relative = REL);
        assert_relative_eq!(p.r1, 2617.80921698367, max_relative = REL);
        assert_relative_eq!(p.lambda_s, 27.923298314492488, max_relative = REL);
        assert_relative_eq!(p.tau_cut, 238433.77899880434, max_relative = REL);
        assert!(report.contamination_ok);
        assert!(report.sample_size_ok); // n = 1e4 >= 41.45
    }

    #[test]
    fn lambda_s_scales_linearly_in_sigma() {
        let base = theory_params_known(
            1000, 64, 2, 5, 0.1, 1.0, 1.0, 1.0, 1.0, &TuningConstants::default(),
        )
        .unwrap()
        .0;
        let scaled = theory_params_known(
            1000, 64, 2, 5, 0.1, 3.5, 1.0, 1.0, 1.0, &TuningConstants::default(),
        )
        .unwrap()
        .0;
        assert_relative_eq!(scaled.lambda_s, 3.5 * base.lambda_s, max_relative = 1e-12);
        assert_relative_eq!(scaled.lambda_o, 3.5 * base.lambda_o, max_relative = 1e-12);
        assert_relative_eq!(scaled.r2, 3.5 * base.r2, max_relative = 1e-12);
    }

    #[test]
    fn radii_shrink_with_more_samples() {
        let small = theory_params_unknown(
            500, 64, 2, 5, 0.1, 1.0, 1.0, 1.0, 1.0, &TuningConstants::default(),
        )
        .unwrap()
        .0;
        let big = theory_params_unknown(
            50_000, 64, 2, 5, 0.1, 1.0, 1.0, 1.0, 1.0, &TuningConstants::default(),
        )
        .unwrap()
        .0;
        assert!(big.r2 < small.r2);
        assert!(big.lambda_s < small.lambda_s);
    }

    #[test]
    fn theory_rules_reject_bad_scalars() {
        let c = TuningConstants::default();
        assert!(theory_params_known(100, 32, 2, 0, 0.1, 0.0, 1.0, 1.0, 1.0, &c).is_err());
        assert!(theory_params_known(100, 32, 2, 0, 0.1, 1.0, 0.5, 1.0, 1.0, &c).is_err());
        assert!(theory_params_unknown(100, 32, 2, 0, 1.5, 1.0, 1.0, 1.0, 1.0, &c).is_err());
        assert!(theory_params_unknown(100, 32, 2, 0, 0.1, 1.0, 1.0, -1.0, 1.0, &c).is_err());
    }

    fn gaussian_like(rng: &mut ChaCha8Rng) -> f64 {
        // Sum of uniforms is good enough for tuning smoke tests.
        (0..12).map(|_| rng.random_range(-0.5..0.5)).sum()
    }

    #[test]
    fn practical_rule_recovers_scale_and_sparsity() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let (n, d) = (500, 30);
        let x = Array2::from_shape_fn((n, d), |_| gaussian_like(&mut rng));
        let mut beta = Array1::zeros(d);
        beta[2] = 3.0;
        beta[11] = -2.0;
        let sigma_true = 0.7;
        let noise = Array1::from_shape_fn(n, |_| sigma_true * gaussian_like(&mut rng));
        let y = x.dot(&beta) + &noise;
        let data = Dataset::new(x, y).unwrap();
        let tuned = practical_params(&data, &PilotOptions::default()).unwrap();
        assert!(
            (tuned.sigma_hat - sigma_true).abs() < 0.20 * sigma_true,
            "sigma_hat {}",
            tuned.sigma_hat
        );
        assert!(tuned.s_hat >= 2 && tuned.s_hat <= 10, "s_hat {}", tuned.s_hat);
        assert!((tuned.sigma_max_hat - 1.0).abs() < 0.3, "sigma_max_hat {}", tuned.sigma_max_hat);
        // Structure of the derived parameters.
        let p = &tuned.params;
        assert_relative_eq!(
            p.lambda_o,
            2.0 * tuned.sigma_hat * 3.0 / (n as f64).sqrt(),
            max_relative = 1e-12
        );
        assert_relative_eq!(p.r1, 5.0 * (tuned.s_hat as f64).sqrt(), max_relative = 1e-12);
        assert_abs_diff_eq!(p.eps, 0.0, epsilon = 0.0);
        assert!(p.tau_cut > p.r2 * p.r2 * 0.5, "tau_cut {} too small", p.tau_cut);
    }

    #[test]
    fn practical_rule_handles_budget_and_retained_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (n, d) = (60, 9);
        let x = Array2::from_shape_fn((n, d), |_| gaussian_like(&mut rng));
        let y = Array1::from_shape_fn(n, |_| gaussian_like(&mut rng));
        let data = Dataset::new(x, y).unwrap();
        let opts = PilotOptions { outlier_budget: 6, ..PilotOptions::default() };
        let tuned = practical_params(&data, &opts).unwrap();
        assert_abs_diff_eq!(tuned.params.eps, 0.1, epsilon = 1e-15);
        assert!(tuned.rates.r_o > 0.0);

        let kept: Vec<usize> = (0..50).collect();
        let sub = practical_params(
            &data,
            &PilotOptions { outlier_budget: 6, retained: Some(kept), ..PilotOptions::default() },
        )
        .unwrap();
        assert!(sub.params.lambda_o > 0.0);
        assert!(practical_params(
            &data,
            &PilotOptions { retained: Some(vec![]), ..PilotOptions::default() }
        )
        .is_err());
        assert!(practical_params(
            &data,
            &PilotOptions { outlier_budget: 30, ..PilotOptions::default() }
        )
        .is_err());
    }

    #[test]
    fn practical_rule_survives_noiseless_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (n, d) = (50, 6);
        let x = Array2::from_shape_fn((n, d), |_| gaussian_like(&mut rng));
        let mut beta = Array1::zeros(d);
        beta[0] = 1.0;
        let y = x.dot(&beta);
        let data = Dataset::new(x, y).unwrap();
        let tuned = practical_params(&data, &PilotOptions::default()).unwrap();
        assert!(tuned.params.lambda_o > 0.0);
        assert!(tuned.params.validate().is_ok());
    }
}
