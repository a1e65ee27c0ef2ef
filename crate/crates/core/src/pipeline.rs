//! End-to-end estimation and batch experiment driver.
//!
//! [`estimate`] chains the three stages — weight solve, truncation,
//! penalized fit — under caller-supplied tuning. [`estimate_practical`]
//! wraps the same chain in data-driven tuning, re-estimating the fit
//! penalties on the retained rows only. [`run_sweep`] fans a grid of
//! scenario cells out over repetitions in parallel and returns flat
//! records ready for [`crate::io::write_records`].

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use ndarray::Array1;
use rayon::prelude::*;

use crate::data::{Dataset, GroundTruth};
use crate::error::{Error, Result};
use crate::lab::{contaminate, generate_clean, AttackSpec, GeneratorSpec};
use crate::regression::{fit_penalized_huber, FitOptions, HuberFitResult};
use crate::baselines::{fit_huber_unweighted, fit_lasso};
use crate::saddle::{solve_weights, SaddleOptions, SaddleReport};
use crate::tuning::{practical_params, PilotOptions, PracticalTuning, TuningParams};
use crate::weights::{truncate_weights, TruncatedWeights, WeightVector};

/// The estimators a sweep can run side by side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    /// The full weight-then-fit pipeline.
    Pipeline,
    /// l1-penalized least squares on all rows.
    Lasso,
    /// Penalized Huber regression with uniform weights (no screening).
    HuberUnweighted,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] =
        [EstimatorKind::Pipeline, EstimatorKind::Lasso, EstimatorKind::HuberUnweighted];

    pub fn name(&self) -> &'static str {
        match self {
            EstimatorKind::Pipeline => "pipeline",
            EstimatorKind::Lasso => "lasso",
            EstimatorKind::HuberUnweighted => "huber",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pipeline" => Ok(EstimatorKind::Pipeline),
            "lasso" => Ok(EstimatorKind::Lasso),
            "huber" => Ok(EstimatorKind::HuberUnweighted),
            other => Err(Error::invalid(format!(
                "unknown estimator '{other}' (expected pipeline, lasso, or huber)"
            ))),
        }
    }
}

/// Knobs for a single [`estimate`] call.
#[derive(Debug, Clone, Default)]
pub struct EstimateOptions {
    pub saddle: SaddleOptions,
    pub fit: FitOptions,
    /// When the certificate exceeds the cutoff the weighting is reported as
    /// failed. With this flag set the fit still runs, on uniform weights;
    /// without it no coefficients are produced.
    pub fallback_uniform: bool,
    /// Replaces the certificate cutoff from the tuning parameters.
    pub tau_cut_override: Option<f64>,
}

/// Everything a single estimation run produced.
#[derive(Debug, Clone)]
pub struct Estimate {
    /// Fitted coefficients; `None` when the weighting failed certification
    /// and no uniform fallback was requested.
    pub beta_hat: Option<Array1<f64>>,
    pub saddle: SaddleReport,
    pub fit: Option<HuberFitResult>,
    pub truncated: Option<TruncatedWeights>,
}

fn resolved_params(params: &TuningParams, opts: &EstimateOptions) -> Result<TuningParams> {
    let mut p = params.clone();
    if let Some(t) = opts.tau_cut_override {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::invalid(format!(
                "tau_cut override must be finite and >= 0, got {t}"
            )));
        }
        p.tau_cut = t;
    }
    p.validate()?;
    Ok(p)
}

fn finish_estimate(
    data: &Dataset,
    report: SaddleReport,
    lambda_o: f64,
    lambda_s: f64,
    opts: &EstimateOptions,
) -> Result<Estimate> {
    if report.failed && !opts.fallback_uniform {
        return Ok(Estimate { beta_hat: None, saddle: report, fit: None, truncated: None });
    }
    let weights = if report.failed {
        WeightVector::uniform(data.n(), 0.0)?
    } else {
        report.weights.clone()
    };
    let truncated = truncate_weights(&weights);
    let fit = fit_penalized_huber(data, &truncated, lambda_o, lambda_s, &opts.fit)?;
    Ok(Estimate {
        beta_hat: Some(fit.beta_hat.clone()),
        saddle: report,
        fit: Some(fit),
        truncated: Some(truncated),
    })
}

/// Runs the full pipeline under explicit tuning parameters.
///
/// `sigma` selects the payoff: pass the known covariance to center the
/// quadratic forms, or `None` to work with raw second moments.
pub fn estimate(
    data: &Dataset,
    sigma: Option<&ndarray::Array2<f64>>,
    params: &TuningParams,
    opts: &EstimateOptions,
) -> Result<Estimate> {
    let p = resolved_params(params, opts)?;
    let report = solve_weights(data.design(), sigma, &p, &opts.saddle)?;
    finish_estimate(data, report, p.lambda_o, p.lambda_s, opts)
}

/// Runs the pipeline with data-driven tuning, in two passes.
///
/// Pass one tunes from a pilot fit on all rows and solves the weighting
/// problem. Pass two re-runs the pilot on the rows the truncated weights
/// kept, so the noise-scale estimate behind the fit penalties is not
/// inflated by the very rows the weighting screened out. Returns the
/// estimate together with the pass-two tuning report (pass one's when the
/// weighting failed without fallback).
pub fn estimate_practical(
    data: &Dataset,
    pilot: &PilotOptions,
    opts: &EstimateOptions,
) -> Result<(Estimate, PracticalTuning)> {
    let mut stage_a = pilot.clone();
    stage_a.retained = None;
    let tune_a = practical_params(data, &stage_a)?;
    let p = resolved_params(&tune_a.params, opts)?;
    let report = solve_weights(data.design(), None, &p, &opts.saddle)?;

    if report.failed && !opts.fallback_uniform {
        let est = Estimate { beta_hat: None, saddle: report, fit: None, truncated: None };
        return Ok((est, tune_a));
    }
    let weights = if report.failed {
        WeightVector::uniform(data.n(), 0.0)?
    } else {
        report.weights.clone()
    };
    let truncated = truncate_weights(&weights);

    let mut stage_b = pilot.clone();
    stage_b.retained = Some(truncated.retained().to_vec());
    let tune_b = practical_params(data, &stage_b)?;
    let fit = fit_penalized_huber(
        data,
        &truncated,
        tune_b.params.lambda_o,
        tune_b.params.lambda_s,
        &opts.fit,
    )?;
    let est = Estimate {
        beta_hat: Some(fit.beta_hat.clone()),
        saddle: report,
        fit: Some(fit),
        truncated: Some(truncated),
    };
    Ok((est, tune_b))
}

/// One scenario in a sweep grid: how to draw clean data and how to corrupt
/// it.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub generator: GeneratorSpec,
    pub attack: AttackSpec,
}

/// Batch-level knobs shared by every run in a sweep.
#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub estimate: EstimateOptions,
    /// Contamination budget handed to the practical tuner; `None` uses each
    /// cell's true outlier count (the budget an informed operator would
    /// set, and the honest default for method comparisons).
    pub outlier_budget: Option<usize>,
    pub delta: f64,
    pub quantile_knob: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        let pilot = PilotOptions::default();
        SweepOptions {
            estimate: EstimateOptions::default(),
            outlier_budget: None,
            delta: pilot.delta,
            quantile_knob: pilot.quantile_knob,
        }
    }
}

/// One estimator's result on one replicated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    /// Index of the cell in the sweep grid.
    pub cell: usize,
    pub n: usize,
    pub d: usize,
    /// True sparsity of the generated coefficients.
    pub s: usize,
    /// Number of corrupted rows.
    pub o: usize,
    pub sigma: f64,
    /// Replication counter (not the raw RNG seed).
    pub seed: u64,
    pub estimator: String,
    pub l2_error: f64,
    pub l1_error: f64,
    /// Final weighting certificate; `NaN` for baselines, which have none.
    pub certificate: f64,
    /// Whether the weighting certificate exceeded its cutoff.
    pub failed: bool,
    /// Rows kept by weight truncation (all rows for baselines).
    pub retained: usize,
    pub wall_ms: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mix_seed(parts: &[u64]) -> u64 {
    parts.iter().fold(0x243F_6A88_85A3_08D3, |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

fn run_one(
    est: EstimatorKind,
    data: &Dataset,
    truth: &GroundTruth,
    pilot: &PilotOptions,
    opts: &SweepOptions,
) -> Result<SweepRecord> {
    let start = Instant::now();
    let n = data.n();
    let (beta, certificate, failed, retained) = match est {
        EstimatorKind::Pipeline => {
            let (e, _) = estimate_practical(data, pilot, &opts.estimate)?;
            let retained = e.truncated.as_ref().map_or(0, TruncatedWeights::n_retained);
            (e.beta_hat, e.saddle.certificate_value, e.saddle.failed, retained)
        }
        EstimatorKind::Lasso => {
            let tune = practical_params(data, pilot)?;
            let fit = fit_lasso(data, tune.params.lambda_s, &opts.estimate.fit)?;
            (Some(fit.beta_hat), f64::NAN, false, n)
        }
        EstimatorKind::HuberUnweighted => {
            let tune = practical_params(data, pilot)?;
            let fit = fit_huber_unweighted(
                data,
                tune.params.lambda_o,
                tune.params.lambda_s,
                &opts.estimate.fit,
            )?;
            (Some(fit.beta_hat), f64::NAN, false, n)
        }
    };
    let (l2, l1) = match &beta {
        Some(b) => (truth.l2_error(b), truth.l1_error(b)),
        None => (f64::NAN, f64::NAN),
    };
    Ok(SweepRecord {
        cell: 0, // filled by the caller
        n,
        d: data.d(),
        s: truth.s(),
        o: truth.o(),
        sigma: truth.sigma,
        seed: 0, // filled by the caller
        estimator: est.name().to_string(),
        l2_error: l2,
        l1_error: l1,
        certificate,
        failed,
        retained,
        wall_ms: start.elapsed().as_millis() as u64,
    })
}

/// Runs every `(cell, repetition, estimator)` combination and returns the
/// records in that nesting order.
///
/// Replication `rep` of every cell draws its clean data from a seed mixed
/// only from `base_seed` and `rep`, so cells that share a generator also
/// share clean data and differ purely in the attack — paired comparisons
/// across contamination levels see common random numbers. Attack row
/// selection uses a separate stream, and picks rows by a fixed permutation
/// prefix, so raising `o` within a repetition grows the corrupted set
/// monotonically.
pub fn run_sweep(
    cells: &[SweepCell],
    reps: usize,
    estimators: &[EstimatorKind],
    base_seed: u64,
    opts: &SweepOptions,
) -> Result<Vec<SweepRecord>> {
    if cells.is_empty() {
        return Err(Error::invalid("sweep needs at least one cell"));
    }
    if reps == 0 {
        return Err(Error::invalid("sweep needs at least one repetition"));
    }
    if estimators.is_empty() {
        return Err(Error::invalid("sweep needs at least one estimator"));
    }

    let tasks: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..reps as u64).map(move |r| (c, r)))
        .collect();

    let nested: Vec<Vec<SweepRecord>> = tasks
        .par_iter()
        .map(|&(cell_idx, rep)| -> Result<Vec<SweepRecord>> {
            let cell = &cells[cell_idx];
            let mut gen = cell.generator.clone();
            gen.seed = mix_seed(&[base_seed, rep]);
            let (clean, clean_truth) = generate_clean(&gen)?;
            let attack_seed = mix_seed(&[base_seed, rep, 0xA77A_C4ED]);
            let (data, truth) = contaminate(&clean, &clean_truth, &cell.attack, attack_seed)?;

            let pilot = PilotOptions {
                outlier_budget: opts.outlier_budget.unwrap_or(cell.attack.o),
                delta: opts.delta,
                quantile_knob: opts.quantile_knob,
                ..PilotOptions::default()
            };
            estimators
                .iter()
                .map(|&est| {
                    let mut rec = run_one(est, &data, &truth, &pilot, opts)?;
                    rec.cell = cell_idx;
                    rec.seed = rep;
                    Ok(rec)
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    Ok(nested.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::AttackStrategy;
    use crate::tuning::theory_params_known;
    use crate::tuning::TuningConstants;
    use ndarray::Array2;

    fn small_instance(seed: u64) -> (Dataset, GroundTruth) {
        let spec = GeneratorSpec::gaussian(80, 12, 2, 0.3, 2.0, seed);
        generate_clean(&spec).unwrap()
    }

    fn loose_params() -> TuningParams {
        TuningParams::new(0.5, 0.05, 0.1, 1e6, 10.0, 5.0).unwrap()
    }

    #[test]
    fn estimator_kind_round_trips_through_strings() {
        for kind in EstimatorKind::ALL {
            assert_eq!(kind.name().parse::<EstimatorKind>().unwrap(), kind);
        }
        assert!("ridge".parse::<EstimatorKind>().is_err());
    }

    #[test]
    fn estimate_produces_coefficients_on_clean_data() {
        let (data, truth) = small_instance(5);
        let sigma = Array2::eye(data.d());
        let est =
            estimate(&data, Some(&sigma), &loose_params(), &EstimateOptions::default()).unwrap();
        assert!(!est.saddle.failed);
        let beta = est.beta_hat.expect("successful run returns coefficients");
        assert!(truth.l2_error(&beta) < truth.l2_error(&Array1::zeros(data.d())));
        assert!(est.fit.is_some() && est.truncated.is_some());
    }

    #[test]
    fn tau_override_controls_the_fail_path() {
        let (data, _) = small_instance(6);
        let params = loose_params();
        let mut opts = EstimateOptions::default();
        opts.tau_cut_override = Some(0.0);

        let est = estimate(&data, None, &params, &opts).unwrap();
        assert!(est.saddle.failed, "zero cutoff must trip the certificate");
        assert!(est.beta_hat.is_none() && est.fit.is_none());

        opts.fallback_uniform = true;
        let est = estimate(&data, None, &params, &opts).unwrap();
        assert!(est.saddle.failed);
        let trunc = est.truncated.expect("fallback still truncates");
        assert_eq!(trunc.n_retained(), data.n(), "uniform fallback keeps every row");
        assert!(est.beta_hat.is_some());

        opts.tau_cut_override = Some(f64::NAN);
        assert!(estimate(&data, None, &params, &opts).is_err());
    }

    #[test]
    fn practical_estimate_recovers_a_planted_signal() {
        let (data, truth) = small_instance(7);
        let (est, tune) =
            estimate_practical(&data, &PilotOptions::default(), &EstimateOptions::default())
                .unwrap();
        let beta = est.beta_hat.expect("clean data should pass certification");
        assert!(truth.l2_error(&beta) < 0.8, "error {}", truth.l2_error(&beta));
        assert!(tune.sigma_hat > 0.0);

        // On clean data the robust pipeline should cost at most a modest
        // factor over the plain lasso at the same penalty.
        let lasso = fit_lasso(&data, tune.params.lambda_s, &FitOptions::default()).unwrap();
        let ratio = truth.l2_error(&beta) / truth.l2_error(&lasso.beta_hat);
        assert!(ratio <= 1.5, "pipeline/lasso clean-data error ratio {ratio}");
    }

    #[test]
    fn theory_tuning_feeds_the_pipeline() {
        let (data, _) = small_instance(11);
        let (params, _) = theory_params_known(
            data.n(),
            data.d(),
            2,
            0,
            0.1,
            0.3,
            1.0,
            1.0,
            1.0,
            &TuningConstants::default(),
        )
        .unwrap();
        let sigma = Array2::eye(data.d());
        let mut opts = EstimateOptions::default();
        opts.tau_cut_override = Some(1e9); // theory cutoffs are for asymptotic regimes
        let est = estimate(&data, Some(&sigma), &params, &opts).unwrap();
        assert!(est.beta_hat.is_some());
    }

    #[test]
    fn sweep_is_deterministic_and_ordered() {
        let gen = GeneratorSpec::gaussian(60, 9, 2, 0.3, 2.0, 0);
        let attack =
            AttackSpec { o: 6, strategy: AttackStrategy::ResponseShift { scale: 5.0 }, adaptive: false };
        let cells = vec![
            SweepCell { generator: gen.clone(), attack: AttackSpec { o: 0, ..attack.clone() } },
            SweepCell { generator: gen, attack },
        ];
        let ests = [EstimatorKind::Pipeline, EstimatorKind::Lasso];
        let opts = SweepOptions::default();

        let a = run_sweep(&cells, 2, &ests, 42, &opts).unwrap();
        let b = run_sweep(&cells, 2, &ests, 42, &opts).unwrap();
        assert_eq!(a.len(), 8);

        let keys: Vec<(usize, u64, &str)> =
            a.iter().map(|r| (r.cell, r.seed, r.estimator.as_str())).collect();
        assert_eq!(
            keys,
            vec![
                (0, 0, "pipeline"),
                (0, 0, "lasso"),
                (0, 1, "pipeline"),
                (0, 1, "lasso"),
                (1, 0, "pipeline"),
                (1, 0, "lasso"),
                (1, 1, "pipeline"),
                (1, 1, "lasso"),
            ]
        );
        for (ra, rb) in a.iter().zip(&b) {
            assert_eq!(ra.l2_error.to_bits(), rb.l2_error.to_bits());
            assert_eq!(ra.l1_error.to_bits(), rb.l1_error.to_bits());
            assert_eq!(ra.certificate.to_bits(), rb.certificate.to_bits());
            assert_eq!(ra.failed, rb.failed);
            assert_eq!(ra.retained, rb.retained);
        }
        assert_eq!(a[0].o, 0);
        assert_eq!(a[4].o, 6);
    }

    #[test]
    fn cells_with_the_same_generator_share_clean_data() {
        let gen = GeneratorSpec::gaussian(60, 9, 2, 0.3, 2.0, 123);
        let clean = AttackSpec { o: 0, strategy: AttackStrategy::ResponseShift { scale: 5.0 }, adaptive: false };
        let cells =
            vec![SweepCell { generator: gen.clone(), attack: clean.clone() }, SweepCell { generator: gen, attack: clean }];
        let recs = run_sweep(&cells, 1, &[EstimatorKind::Lasso], 7, &SweepOptions::default()).unwrap();
        assert_eq!(recs[0].l2_error.to_bits(), recs[1].l2_error.to_bits());
    }

    #[test]
    fn sweep_rejects_empty_inputs() {
        let gen = GeneratorSpec::gaussian(60, 9, 2, 0.3, 2.0, 0);
        let attack =
            AttackSpec { o: 0, strategy: AttackStrategy::ResponseShift { scale: 1.0 }, adaptive: false };
        let cell = SweepCell { generator: gen, attack };
        let opts = SweepOptions::default();
        assert!(run_sweep(&[], 1, &[EstimatorKind::Lasso], 0, &opts).is_err());
        assert!(run_sweep(std::slice::from_ref(&cell), 0, &[EstimatorKind::Lasso], 0, &opts).is_err());
        assert!(run_sweep(std::slice::from_ref(&cell), 1, &[], 0, &opts).is_err());
    }
}
