//! `robreg` — generate contaminated regression benchmarks, run the robust
//! estimation pipeline or its baselines on them, and sweep scenario grids.
//!
//! Subcommands: `generate`, `estimate`, `sweep`, `baseline`. Every flag can
//! also be set in a TOML config file (one table per subcommand, keys named
//! like the flags); command-line flags override config values. Exit code 0
//! on success, 2 when the weight solver rejects the data and no fallback
//! was requested, 1 on any other error.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use robreg_core::baselines::{fit_huber_unweighted, fit_lasso};
use robreg_core::data::{Dataset, GroundTruth};
use robreg_core::io as rio;
use robreg_core::lab::{
    contaminate, generate_clean, AttackSpec, AttackStrategy, BetaSpec, CovarianceSpec,
    GeneratorSpec, NoiseSpec,
};
use robreg_core::pipeline::{
    estimate, estimate_practical, run_sweep, EstimateOptions, EstimatorKind, SweepCell,
    SweepOptions,
};
use robreg_core::tuning::{
    practical_params, theory_params_known, theory_params_unknown, PilotOptions, TuningConstants,
};

#[derive(Parser)]
#[command(name = "robreg", version, about = "Outlier-robust sparse regression toolkit")]
struct Cli {
    /// TOML config file; flags given on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a synthetic (optionally contaminated) dataset as CSV.
    Generate(GenerateArgs),
    /// Run the full pipeline on a dataset or a fresh synthetic instance.
    Estimate(EstimateArgs),
    /// Run estimators over a grid of (n, o) scenarios with repetitions.
    Sweep(SweepArgs),
    /// Run a single baseline (lasso or huber) with practical tuning.
    Baseline(BaselineArgs),
}

/// Scenario flags shared by every subcommand that can generate data.
#[derive(Args, Clone, Default)]
struct ScenarioArgs {
    /// Number of samples.
    #[arg(long)]
    n: Option<usize>,
    /// Number of covariates.
    #[arg(long)]
    d: Option<usize>,
    /// Sparsity of the true coefficient vector.
    #[arg(long)]
    s: Option<usize>,
    /// Number of rows the adversary replaces.
    #[arg(long)]
    o: Option<usize>,
    /// Noise standard deviation.
    #[arg(long)]
    sigma: Option<f64>,
    /// Attack: response-shift[:scale], leverage[:scale], oracle-tilt[:scale], or none.
    #[arg(long)]
    attack: Option<String>,
    /// Target the rows with the strongest clean signal instead of random rows.
    #[arg(long)]
    adaptive: bool,
    /// Magnitude of the nonzero true coefficients.
    #[arg(long)]
    magnitude: Option<f64>,
    /// Toeplitz covariance correlation (identity covariance when absent).
    #[arg(long)]
    toeplitz: Option<f64>,
    /// Noise law: gaussian, student-t:DF, or rademacher.
    #[arg(long)]
    noise: Option<String>,
    /// RNG seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Deserialize, Default, Clone)]
#[serde(deny_unknown_fields)]
struct ScenarioCfg {
    n: Option<usize>,
    d: Option<usize>,
    s: Option<usize>,
    o: Option<usize>,
    sigma: Option<f64>,
    attack: Option<String>,
    adaptive: Option<bool>,
    magnitude: Option<f64>,
    toeplitz: Option<f64>,
    noise: Option<String>,
    seed: Option<u64>,
}

/// A fully resolved scenario (flags over config over defaults).
struct Scenario {
    generator: GeneratorSpec,
    attack: AttackSpec,
}

fn resolve_scenario(a: &ScenarioArgs, c: &ScenarioCfg) -> Result<Scenario> {
    let n = a.n.or(c.n).unwrap_or(200);
    let d = a.d.or(c.d).unwrap_or(50);
    let s = a.s.or(c.s).unwrap_or(5);
    let o = a.o.or(c.o).unwrap_or(0);
    let sigma = a.sigma.or(c.sigma).unwrap_or(1.0);
    let magnitude = a.magnitude.or(c.magnitude).unwrap_or(1.0);
    let seed = a.seed.or(c.seed).unwrap_or(0);
    let adaptive = a.adaptive || c.adaptive.unwrap_or(false);
    let covariance = match a.toeplitz.or(c.toeplitz) {
        Some(rho) => CovarianceSpec::Toeplitz { rho },
        None => CovarianceSpec::Identity,
    };
    let noise = parse_noise(a.noise.as_deref().or(c.noise.as_deref()).unwrap_or("gaussian"))?;
    let strategy = parse_attack(a.attack.as_deref().or(c.attack.as_deref()).unwrap_or("response-shift"))?;
    let strategy = match strategy {
        Some(st) => st,
        None if o == 0 => AttackStrategy::ResponseShift { scale: 1.0 }, // vacuous at o = 0
        None => bail!("--attack none conflicts with --o {o}"),
    };
    Ok(Scenario {
        generator: GeneratorSpec {
            n,
            d,
            s,
            sigma,
            l: 1.0,
            covariance,
            noise,
            beta: BetaSpec::RandomSupport { magnitude },
            seed,
        },
        attack: AttackSpec { o, strategy, adaptive },
    })
}

fn parse_attack(text: &str) -> Result<Option<AttackStrategy>> {
    let (name, scale) = match text.split_once(':') {
        Some((n, s)) => (n, Some(s.parse::<f64>().with_context(|| format!("bad attack scale '{s}'"))?)),
        None => (text, None),
    };
    Ok(match name {
        "none" => None,
        "response-shift" => Some(AttackStrategy::ResponseShift { scale: scale.unwrap_or(1.0) }),
        "leverage" => Some(AttackStrategy::Leverage { scale: scale.unwrap_or(10.0) }),
        "oracle-tilt" => Some(AttackStrategy::OracleTilt { scale: scale.unwrap_or(5.0) }),
        other => bail!("unknown attack '{other}' (expected response-shift, leverage, oracle-tilt, or none)"),
    })
}

fn parse_noise(text: &str) -> Result<NoiseSpec> {
    Ok(match text {
        "gaussian" => NoiseSpec::Gaussian,
        "rademacher" => NoiseSpec::Rademacher,
        other => match other.split_once(':') {
            Some(("student-t", df)) => NoiseSpec::StudentT {
                df: df.parse().with_context(|| format!("bad student-t degrees of freedom '{df}'"))?,
            },
            _ => bail!("unknown noise '{other}' (expected gaussian, student-t:DF, or rademacher)"),
        },
    })
}

fn generate_scenario(sc: &Scenario) -> Result<(Dataset, GroundTruth)> {
    let (clean, truth) = generate_clean(&sc.generator)?;
    let (data, truth) = contaminate(&clean, &truth, &sc.attack, sc.generator.seed ^ 0xA77A_C4ED)?;
    Ok((data, truth))
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Dataset CSV destination.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional sidecar listing the true coefficients and outlier rows.
    #[arg(long)]
    truth_out: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct GenerateCfg {
    #[serde(flatten)]
    scenario: ScenarioCfg,
    out: Option<PathBuf>,
    truth_out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    /// Dataset CSV to estimate on (mutually exclusive with generator flags).
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Tuning mode: theory-known, theory-unknown, or practical.
    #[arg(long)]
    mode: Option<String>,
    /// Replace the certificate cutoff.
    #[arg(long)]
    tau_cut_override: Option<f64>,
    /// on/off: fit on uniform weights when certification fails.
    #[arg(long)]
    fallback_uniform: Option<String>,
    /// Confidence parameter for theory tuning.
    #[arg(long)]
    delta: Option<f64>,
    /// Subgaussian norm bound for theory tuning.
    #[arg(long)]
    l: Option<f64>,
    /// Covariance operator-norm bound for theory tuning.
    #[arg(long)]
    sigma_max: Option<f64>,
    /// Restricted-eigenvalue constant for theory tuning.
    #[arg(long)]
    re_constant: Option<f64>,
    /// Residual quantile knob for practical tuning.
    #[arg(long)]
    quantile_knob: Option<f64>,
    /// Assumed number of corrupted rows; defaults to --o, which is how a
    /// --input dataset (where generator flags are unavailable) gets one.
    #[arg(long)]
    outlier_budget: Option<usize>,
    /// Write the report here as well as to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct EstimateCfg {
    input: Option<PathBuf>,
    #[serde(flatten)]
    scenario: ScenarioCfg,
    mode: Option<String>,
    tau_cut_override: Option<f64>,
    fallback_uniform: Option<String>,
    delta: Option<f64>,
    l: Option<f64>,
    sigma_max: Option<f64>,
    re_constant: Option<f64>,
    quantile_knob: Option<f64>,
    outlier_budget: Option<usize>,
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Outlier counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    o: Option<Vec<usize>>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    attack: Option<String>,
    #[arg(long)]
    adaptive: bool,
    #[arg(long)]
    magnitude: Option<f64>,
    #[arg(long)]
    toeplitz: Option<f64>,
    #[arg(long)]
    noise: Option<String>,
    /// Repetitions per cell.
    #[arg(long)]
    reps: Option<usize>,
    /// Estimators to run, comma separated (pipeline, lasso, huber).
    #[arg(long, value_delimiter = ',')]
    estimators: Option<Vec<String>>,
    /// on/off: fit on uniform weights when certification fails.
    #[arg(long)]
    fallback_uniform: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Results destination (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SweepCfg {
    n: Option<Vec<usize>>,
    o: Option<Vec<usize>>,
    d: Option<usize>,
    s: Option<usize>,
    sigma: Option<f64>,
    attack: Option<String>,
    adaptive: Option<bool>,
    magnitude: Option<f64>,
    toeplitz: Option<f64>,
    noise: Option<String>,
    reps: Option<usize>,
    estimators: Option<Vec<String>>,
    fallback_uniform: Option<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BaselineArgs {
    /// Dataset CSV to fit (mutually exclusive with generator flags).
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Which baseline: lasso or huber.
    #[arg(long)]
    estimator: Option<String>,
    /// Assumed number of corrupted rows for penalty tuning; defaults to --o.
    #[arg(long)]
    outlier_budget: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct BaselineCfg {
    input: Option<PathBuf>,
    #[serde(flatten)]
    scenario: ScenarioCfg,
    estimator: Option<String>,
    outlier_budget: Option<usize>,
    out: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    generate: Option<GenerateCfg>,
    estimate: Option<EstimateCfg>,
    sweep: Option<SweepCfg>,
    baseline: Option<BaselineCfg>,
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile> {
    match path {
        None => Ok(ConfigFile::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
        }
    }
}

fn parse_on_off(value: Option<&str>) -> Result<bool> {
    match value {
        None | Some("off") => Ok(false),
        Some("on") => Ok(true),
        Some(other) => bail!("expected 'on' or 'off', got '{other}'"),
    }
}

/// Writes `text` to stdout and, when given, to `path`.
fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    print!("{text}");
    if let Some(p) = path {
        let mut w = BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        );
        w.write_all(text.as_bytes())?;
    }
    Ok(())
}

fn cmd_generate(args: GenerateArgs, cfg: GenerateCfg) -> Result<ExitCode> {
    let sc = resolve_scenario(&args.scenario, &cfg.scenario)?;
    let (data, truth) = generate_scenario(&sc)?;
    let out = args.out.or(cfg.out);
    match &out {
        Some(p) => rio::write_dataset_file(&data, p)?,
        None => print!("{}", rio::dataset_to_string(&data)),
    }
    if let Some(p) = args.truth_out.or(cfg.truth_out) {
        let mut w = BufWriter::new(
            File::create(&p).with_context(|| format!("creating {}", p.display()))?,
        );
        rio::write_truth(&truth, &mut w)?;
    }
    if let Some(p) = &out {
        eprintln!(
            "wrote {} samples x {} covariates ({} corrupted) to {}",
            data.n(),
            data.d(),
            truth.o(),
            p.display()
        );
    }
    Ok(ExitCode::SUCCESS)
}

/// Data plus optional ground truth, from a file or a fresh draw.
fn resolve_input(
    input: Option<PathBuf>,
    scenario_given: bool,
    sc: &Scenario,
) -> Result<(Dataset, Option<GroundTruth>)> {
    match input {
        Some(path) => {
            if scenario_given {
                bail!("--input conflicts with generator flags (--n/--d/--seed)");
            }
            let data = rio::read_dataset_file(&path)
                .with_context(|| format!("reading {}", path.display()))?;
            Ok((data, None))
        }
        None => {
            let (data, truth) = generate_scenario(sc)?;
            Ok((data, Some(truth)))
        }
    }
}

/// Flags that describe how to synthesize data, meaningless next to --input.
/// The rest of the scenario flags (--s, --o, --sigma, ...) stay legal there:
/// they double as estimation-time assumptions for tuning.
fn scenario_flags_given(a: &ScenarioArgs) -> bool {
    a.n.is_some() || a.d.is_some() || a.seed.is_some()
}

fn push_fit_report(
    report: &mut String,
    beta: &ndarray::Array1<f64>,
    truth: Option<&GroundTruth>,
) {
    if let Some(t) = truth {
        report.push_str(&format!("l2_error={:?}\n", t.l2_error(beta)));
        report.push_str(&format!("l1_error={:?}\n", t.l1_error(beta)));
    }
    for (j, b) in beta.iter().enumerate() {
        report.push_str(&format!("beta_{j}={b:?}\n"));
    }
}

fn cmd_estimate(args: EstimateArgs, cfg: EstimateCfg) -> Result<ExitCode> {
    let sc = resolve_scenario(&args.scenario, &cfg.scenario)?;
    let input = args.input.or(cfg.input);
    let (data, truth) =
        resolve_input(input, scenario_flags_given(&args.scenario), &sc)?;

    let mode = args.mode.or(cfg.mode).unwrap_or_else(|| "practical".into());
    let fallback = parse_on_off(
        args.fallback_uniform.as_deref().or(cfg.fallback_uniform.as_deref()),
    )?;
    let opts = EstimateOptions {
        fallback_uniform: fallback,
        tau_cut_override: args.tau_cut_override.or(cfg.tau_cut_override),
        ..EstimateOptions::default()
    };
    let delta = args.delta.or(cfg.delta).unwrap_or(0.1);
    let knob = args.quantile_knob.or(cfg.quantile_knob).unwrap_or(3.0);
    let budget = args.outlier_budget.or(cfg.outlier_budget).unwrap_or(sc.attack.o);

    let est = match mode.as_str() {
        "practical" => {
            let pilot = PilotOptions {
                outlier_budget: budget,
                delta,
                quantile_knob: knob,
                ..PilotOptions::default()
            };
            estimate_practical(&data, &pilot, &opts)?.0
        }
        "theory-known" | "theory-unknown" => {
            let l = args.l.or(cfg.l).unwrap_or(1.0);
            let sigma_max = args.sigma_max.or(cfg.sigma_max).unwrap_or(1.0);
            let re = args.re_constant.or(cfg.re_constant).unwrap_or(1.0);
            let (n, d) = (data.n(), data.d());
            let (s, o, sigma) = (sc.generator.s, budget, sc.generator.sigma);
            let consts = TuningConstants::default();
            if mode == "theory-known" {
                let (params, validity) =
                    theory_params_known(n, d, s, o, delta, sigma, l, sigma_max, re, &consts)?;
                if !validity.all_ok() {
                    eprintln!("warning: outside the regime the known-covariance guarantees assume");
                }
                let cov = sc.generator.covariance.materialize(d)?;
                estimate(&data, Some(&cov), &params, &opts)?
            } else {
                let (params, validity) =
                    theory_params_unknown(n, d, s, o, delta, sigma, l, sigma_max, re, &consts)?;
                if !validity.all_ok() {
                    eprintln!("warning: outside the regime the unknown-covariance guarantees assume");
                }
                estimate(&data, None, &params, &opts)?
            }
        }
        other => bail!("unknown mode '{other}' (expected theory-known, theory-unknown, or practical)"),
    };

    let mut report = String::new();
    report.push_str(&format!(
        "mode={mode} n={} d={} certificate={:?} failed={} converged={} iterations={}\n",
        data.n(),
        data.d(),
        est.saddle.certificate_value,
        u8::from(est.saddle.failed),
        est.saddle.converged,
        est.saddle.iterations
    ));
    if let Some(t) = &est.truncated {
        report.push_str(&format!("retained={}\n", t.n_retained()));
    }
    if let Some(f) = &est.fit {
        report.push_str(&format!(
            "fit_iterations={} kkt_residual={:?} fit_converged={}\n",
            f.iterations, f.kkt_residual, f.converged
        ));
    }
    match &est.beta_hat {
        Some(beta) => {
            push_fit_report(&mut report, beta, truth.as_ref());
            emit(&report, args.out.or(cfg.out).as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        None => {
            emit(&report, args.out.or(cfg.out).as_deref())?;
            eprintln!(
                "weight certification failed (certificate {:?} above cutoff); no estimate produced",
                est.saddle.certificate_value
            );
            Ok(ExitCode::from(2))
        }
    }
}

fn cmd_sweep(args: SweepArgs, cfg: SweepCfg) -> Result<ExitCode> {
    let ns = args.n.or(cfg.n).unwrap_or_else(|| vec![200]);
    let os = args.o.or(cfg.o).unwrap_or_else(|| vec![0]);
    let d = args.d.or(cfg.d).unwrap_or(50);
    let s = args.s.or(cfg.s).unwrap_or(5);
    let sigma = args.sigma.or(cfg.sigma).unwrap_or(1.0);
    let magnitude = args.magnitude.or(cfg.magnitude).unwrap_or(1.0);
    let adaptive = args.adaptive || cfg.adaptive.unwrap_or(false);
    let covariance = match args.toeplitz.or(cfg.toeplitz) {
        Some(rho) => CovarianceSpec::Toeplitz { rho },
        None => CovarianceSpec::Identity,
    };
    let noise = parse_noise(args.noise.as_deref().or(cfg.noise.as_deref()).unwrap_or("gaussian"))?;
    let strategy =
        parse_attack(args.attack.as_deref().or(cfg.attack.as_deref()).unwrap_or("response-shift"))?;
    let reps = args.reps.or(cfg.reps).unwrap_or(1);
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let fallback = parse_on_off(
        args.fallback_uniform.as_deref().or(cfg.fallback_uniform.as_deref()),
    )?;

    let est_names = args
        .estimators
        .or(cfg.estimators)
        .unwrap_or_else(|| vec!["pipeline".into(), "lasso".into(), "huber".into()]);
    let estimators: Vec<EstimatorKind> = est_names
        .iter()
        .map(|name| name.parse())
        .collect::<robreg_core::Result<_>>()?;

    let mut cells = Vec::new();
    for &n in &ns {
        for &o in &os {
            let strategy = match &strategy {
                Some(st) => st.clone(),
                None if o == 0 => AttackStrategy::ResponseShift { scale: 1.0 },
                None => bail!("--attack none conflicts with --o {o}"),
            };
            cells.push(SweepCell {
                generator: GeneratorSpec {
                    n,
                    d,
                    s,
                    sigma,
                    l: 1.0,
                    covariance: covariance.clone(),
                    noise: noise.clone(),
                    beta: BetaSpec::RandomSupport { magnitude },
                    seed: 0, // the sweep driver derives per-repetition seeds
                },
                attack: AttackSpec { o, strategy, adaptive },
            });
        }
    }

    let opts = SweepOptions {
        estimate: EstimateOptions { fallback_uniform: fallback, ..EstimateOptions::default() },
        ..SweepOptions::default()
    };
    let records = run_sweep(&cells, reps, &estimators, seed, &opts)?;
    match args.out.or(cfg.out) {
        Some(p) => {
            rio::write_records_file(&records, &p)?;
            eprintln!("wrote {} records to {}", records.len(), p.display());
        }
        None => print!("{}", rio::records_to_string(&records)),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_baseline(args: BaselineArgs, cfg: BaselineCfg) -> Result<ExitCode> {
    let sc = resolve_scenario(&args.scenario, &cfg.scenario)?;
    let input = args.input.or(cfg.input);
    let (data, truth) =
        resolve_input(input, scenario_flags_given(&args.scenario), &sc)?;

    let name = args.estimator.or(cfg.estimator).unwrap_or_else(|| "lasso".into());
    let budget = args.outlier_budget.or(cfg.outlier_budget).unwrap_or(sc.attack.o);
    let pilot = PilotOptions { outlier_budget: budget, ..PilotOptions::default() };
    let tune = practical_params(&data, &pilot)?;
    let fit_opts = robreg_core::regression::FitOptions::default();
    let fit = match name.as_str() {
        "lasso" => fit_lasso(&data, tune.params.lambda_s, &fit_opts)?,
        "huber" => {
            fit_huber_unweighted(&data, tune.params.lambda_o, tune.params.lambda_s, &fit_opts)?
        }
        other => bail!("unknown baseline '{other}' (expected lasso or huber)"),
    };

    let mut report = String::new();
    report.push_str(&format!(
        "estimator={name} n={} d={} fit_iterations={} kkt_residual={:?} fit_converged={}\n",
        data.n(),
        data.d(),
        fit.iterations,
        fit.kkt_residual,
        fit.converged
    ));
    push_fit_report(&mut report, &fit.beta_hat, truth.as_ref());
    emit(&report, args.out.or(cfg.out).as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load_config(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::FAILURE;
        }
    };
    let result = match cli.cmd {
        Cmd::Generate(a) => cmd_generate(a, cfg.generate.unwrap_or_default()),
        Cmd::Estimate(a) => cmd_estimate(a, cfg.estimate.unwrap_or_default()),
        Cmd::Sweep(a) => cmd_sweep(a, cfg.sweep.unwrap_or_default()),
        Cmd::Baseline(a) => cmd_baseline(a, cfg.baseline.unwrap_or_default()),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
