//! Command implementations. Each resolves its configuration, runs the
//! corresponding library calls, prints an aligned summary table, and
//! writes a JSON artifact embedding the resolved configuration.

use std::path::{Path, PathBuf};

use serde::Serialize;

use jcsurv::censoring::fit_km_censoring;
use jcsurv::data::{evaluation_horizon, Dataset, EventLabel};
use jcsurv::metrics::{
    bootstrap_cis_all, weighted_joint_concordance_opts, MetricOptions, MetricReport, TieRule,
};
use jcsurv::models::{fit_cause_specific, CauseSpecificPH, ExpModel, FitConfig};
use jcsurv::risk::{CovariateRiskModel, RiskModel};
use jcsurv::study::{
    efficiency_study, model_comparison, ComparisonConfig, EfficiencyConfig, EfficiencyRow,
    ModelChoice, TruthOracle,
};
use jcsurv::synth::{calibrate_censoring_rate, generate, true_metrics_mc, SynthConfig};
use jcsurv::varimp::{
    standardized_coef_rank, stepwise_cr_rank, stepwise_lumped_rank, EvalScheme, RankConfig,
    RankingResult,
};

use crate::config::{resolve, resolve_opt, FileConfig};
use crate::table;
use crate::{CliError, EvaluateArgs, FitArgs, ModelKind, RankArgs, SimulateArgs, Table1Args, Table2Args, TieKind};

fn write_artifact<T: Serialize>(path: Option<&Path>, artifact: &T) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(artifact)
        .map_err(|e| CliError::numeric(format!("serialization failed: {e}")))?;
    match path {
        Some(path) => std::fs::write(path, json.as_bytes())
            .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn require_path(value: Option<PathBuf>, what: &str) -> Result<PathBuf, CliError> {
    value.ok_or_else(|| CliError::usage(format!("{what} is required (flag or config file)")))
}

fn fmt(v: f64) -> String {
    format!("{v:.4}")
}

// ---------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------

#[derive(Serialize)]
struct EvaluateResolved {
    data: String,
    model: String,
    model_file: Option<String>,
    horizon_quantile: f64,
    horizon: f64,
    ties: String,
    bootstrap: Option<usize>,
    level: f64,
    seed: u64,
}

#[derive(Serialize)]
struct EvaluateArtifact {
    config: EvaluateResolved,
    report: MetricReport,
}

pub fn evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.config.as_deref())?;
    let data = require_path(
        args.data.clone().or(file.get::<PathBuf>("data")?),
        "--data",
    )?;
    let model_kind = resolve(&args.model, &file, "model", ModelKind::Exp)?;
    let model_file = resolve_opt(&args.model_file, &file, "model_file")?;
    let quantile = resolve(&args.horizon_quantile, &file, "horizon_quantile", 0.75)?;
    let horizon_flag = resolve_opt(&args.horizon, &file, "horizon")?;
    let ties = resolve(&args.ties, &file, "ties", TieKind::Strict)?;
    let bootstrap = resolve_opt(&args.bootstrap, &file, "bootstrap")?;
    let level = resolve(&args.level, &file, "level", 0.95)?;
    let seed = resolve(&args.seed, &file, "seed", 0)?;
    let out = resolve_opt(&args.out, &file, "out")?;
    file.finish()?;

    let ds = Dataset::from_csv_path(&data)?;
    let horizon = match horizon_flag {
        Some(h) => h,
        None => evaluation_horizon(&ds, quantile)?,
    };
    let opts = MetricOptions {
        tie_rule: match ties {
            TieKind::Strict => TieRule::Strict,
            TieKind::Half => TieRule::HalfCredit,
        },
    };

    let fitted_csc;
    let covariate_model;
    let model: &dyn RiskModel = match &model_file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
            fitted_csc = CauseSpecificPH::from_json(&text)?;
            &fitted_csc
        }
        None => match model_kind {
            ModelKind::Exp => &ExpModel,
            ModelKind::Csc => {
                fitted_csc = fit_cause_specific(&ds, &FitConfig::default())?;
                &fitted_csc
            }
            ModelKind::Precomputed => {
                covariate_model = CovariateRiskModel::new(ds.n_event_types());
                &covariate_model
            }
        },
    };

    let g = fit_km_censoring(&ds)?;
    let mut report = weighted_joint_concordance_opts(&ds, &model, &g, horizon, &opts)?;
    if let Some(b) = bootstrap {
        report.bootstrap_ci = Some(bootstrap_cis_all(&ds, &model, horizon, b, level, seed)?);
    }

    let mut rows: Vec<Vec<String>> = Vec::new();
    for (idx, c) in report.concordance_per_event.iter().enumerate() {
        rows.push(vec![format!("concordance[{}]", idx + 1), fmt(*c)]);
    }
    rows.push(vec!["accuracy".into(), fmt(report.accuracy)]);
    rows.push(vec!["joint_concordance".into(), fmt(report.joint_concordance)]);
    rows.push(vec![
        "conditional_concordance".into(),
        fmt(report.conditional_concordance),
    ]);
    rows.push(vec!["accuracy_star".into(), fmt(report.accuracy_star)]);
    print!(
        "{}",
        table::render(&["metric".into(), "value".into()], &rows)
    );

    let artifact = EvaluateArtifact {
        config: EvaluateResolved {
            data: data.display().to_string(),
            model: model_kind.label().to_string(),
            model_file: model_file.map(|p| p.display().to_string()),
            horizon_quantile: quantile,
            horizon,
            ties: match ties {
                TieKind::Strict => "strict".to_string(),
                TieKind::Half => "half".to_string(),
            },
            bootstrap,
            level,
            seed,
        },
        report,
    };
    write_artifact(out.as_deref(), &artifact)
}

// ---------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------

#[derive(Serialize)]
struct FitResolved {
    data: String,
    max_iter: usize,
    tol: f64,
    out: String,
}

pub fn fit(args: FitArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.config.as_deref())?;
    let data = require_path(args.data.clone().or(file.get::<PathBuf>("data")?), "--data")?;
    let max_iter = resolve(&args.max_iter, &file, "max_iter", 100)?;
    let tol = resolve(&args.tol, &file, "tol", 1e-8)?;
    let out = require_path(args.out.clone().or(file.get::<PathBuf>("out")?), "--out")?;
    file.finish()?;

    let ds = Dataset::from_csv_path(&data)?;
    let model = fit_cause_specific(&ds, &FitConfig { max_iter, tol })?;
    std::fs::write(&out, model.to_json_pretty())
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", out.display())))?;

    let resolved = FitResolved {
        data: data.display().to_string(),
        max_iter,
        tol,
        out: out.display().to_string(),
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&serde_json::json!({ "config": resolved }))
            .expect("config json")
    );
    let mut rows = Vec::new();
    for code in 1..=ds.n_event_types() as u32 {
        let coefs = model.coefficients(EventLabel::new(code));
        for (name, c) in ds.covariate_names().iter().zip(coefs) {
            rows.push(vec![format!("event {code}"), name.clone(), fmt(*c)]);
        }
    }
    print!(
        "{}",
        table::render(
            &["cause".into(), "covariate".into(), "coefficient".into()],
            &rows
        )
    );
    Ok(())
}

// ---------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------

#[derive(Serialize)]
struct SimulateResolved {
    n: usize,
    seed: u64,
    stream: u64,
    censoring: f64,
    beta0: f64,
    lambda0: f64,
    out: String,
}

pub fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.config.as_deref())?;
    let n = resolve(&args.n, &file, "n", 1000)?;
    let seed = resolve(&args.seed, &file, "seed", 0)?;
    let stream = resolve(&args.stream, &file, "stream", 0)?;
    let censoring = resolve(&args.censoring, &file, "censoring", 0.0)?;
    let beta0 = resolve(&args.beta0, &file, "beta0", 0.0)?;
    let out = require_path(args.out.clone().or(file.get::<PathBuf>("out")?), "--out")?;
    let oracle_out = resolve_opt(&args.oracle_out, &file, "oracle_out")?;
    let oracle_n = resolve(&args.oracle_n, &file, "oracle_n", 100_000)?;
    let quantile = resolve(&args.horizon_quantile, &file, "horizon_quantile", 0.75)?;
    file.finish()?;

    if !(0.0..1.0).contains(&censoring) {
        return Err(CliError::usage(format!(
            "--censoring {censoring} outside [0, 1)"
        )));
    }
    let base = SynthConfig::uncensored(n, seed).with_stream(stream);
    let lambda0 = if censoring == 0.0 {
        0.0
    } else {
        calibrate_censoring_rate(&SynthConfig { beta0, ..base }, censoring, 1e-4)?
    };
    let ds = generate(&base.with_censoring(lambda0, beta0));
    ds.to_csv_path(&out)?;

    let resolved = SimulateResolved {
        n,
        seed,
        stream,
        censoring,
        beta0,
        lambda0,
        out: out.display().to_string(),
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&serde_json::json!({ "config": resolved }))
            .expect("config json")
    );

    if let Some(oracle_path) = oracle_out {
        let truth = true_metrics_mc(&ExpModel, quantile, oracle_n, seed)?;
        #[derive(Serialize)]
        struct OracleArtifact {
            config: serde_json::Value,
            horizon: f64,
            split_half_se_jc: f64,
            report: MetricReport,
        }
        write_artifact(
            Some(oracle_path.as_path()),
            &OracleArtifact {
                config: serde_json::json!({
                    "model": "exp",
                    "oracle_n": oracle_n,
                    "horizon_quantile": quantile,
                    "seed": seed,
                }),
                horizon: truth.horizon,
                split_half_se_jc: truth.split_half_se_jc,
                report: truth.report,
            },
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------
// simulate-table1
// ---------------------------------------------------------------------

#[derive(Serialize)]
struct Table1Resolved {
    model: String,
    censoring: Vec<f64>,
    n: Vec<usize>,
    replicates: usize,
    seed: u64,
    beta0: f64,
    horizon_quantile: f64,
    n_truth: usize,
    truth: String,
    max_iter: usize,
    tol: f64,
}

#[derive(Serialize)]
struct Table1Artifact {
    config: Table1Resolved,
    horizon: f64,
    rows: Vec<EfficiencyRow>,
}

pub fn simulate_table1(args: Table1Args) -> Result<(), CliError> {
    let file = FileConfig::load(args.config.as_deref())?;
    let model = resolve(&args.model, &file, "model", ModelKind::Exp)?;
    let censoring = args
        .censoring
        .clone()
        .or(file.get_list::<f64>("censoring")?)
        .unwrap_or_else(|| vec![0.5]);
    let sizes = args
        .n
        .clone()
        .or(file.get_list::<usize>("n")?)
        .unwrap_or_else(|| vec![1000]);
    let replicates = resolve(&args.replicates, &file, "replicates", 100)?;
    let seed = resolve(&args.seed, &file, "seed", 0)?;
    let beta0 = resolve(&args.beta0, &file, "beta0", 0.0)?;
    let quantile = resolve(&args.horizon_quantile, &file, "horizon_quantile", 0.75)?;
    let n_truth = resolve(&args.n_truth, &file, "n_truth", 100_000)?;
    let truth_raw = resolve_opt(&args.truth, &file, "truth")?;
    let max_iter = resolve(&args.max_iter, &file, "max_iter", 100)?;
    let tol = resolve(&args.tol, &file, "tol", 1e-8)?;
    let out = resolve_opt(&args.out, &file, "out")?;
    file.finish()?;

    let model_choice = match model {
        ModelKind::Exp => ModelChoice::Exp,
        ModelKind::Csc => ModelChoice::Csc,
        ModelKind::Precomputed => {
            return Err(CliError::usage(
                "the efficiency study fits its models; use exp or csc",
            ))
        }
    };
    let truth = match truth_raw.as_deref() {
        None => match model_choice {
            ModelChoice::Exp => TruthOracle::Integral,
            ModelChoice::Csc => TruthOracle::MonteCarlo,
        },
        Some("integral") => TruthOracle::Integral,
        Some("mc") => TruthOracle::MonteCarlo,
        Some(other) => {
            return Err(CliError::usage(format!(
                "unknown truth oracle `{other}` (expected integral or mc)"
            )))
        }
    };

    let mut rows = Vec::new();
    let mut horizon = 0.0;
    for &rate in &censoring {
        for &n in &sizes {
            let cfg = EfficiencyConfig {
                model: model_choice,
                censoring_rate: rate,
                beta0,
                n,
                replicates,
                seed,
                horizon_quantile: quantile,
                n_truth,
                truth,
                fit: FitConfig { max_iter, tol },
            };
            let (h, row) = efficiency_study(&cfg)?;
            horizon = h;
            rows.push(row);
        }
    }

    let table_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.model.clone(),
                fmt(r.true_jc),
                format!("{:.0}%", r.censoring_rate * 100.0),
                r.n.to_string(),
                fmt(r.rmse),
                fmt(r.se),
                fmt(r.bias),
                format!("{}/{}", r.replicates_used, r.replicates_requested),
            ]
        })
        .collect();
    print!(
        "{}",
        table::render(
            &[
                "model".into(),
                "true_jc".into(),
                "censoring".into(),
                "n".into(),
                "rmse".into(),
                "se".into(),
                "bias".into(),
                "replicates".into(),
            ],
            &table_rows
        )
    );

    let artifact = Table1Artifact {
        config: Table1Resolved {
            model: model.label().to_string(),
            censoring,
            n: sizes,
            replicates,
            seed,
            beta0,
            horizon_quantile: quantile,
            n_truth,
            truth: match truth {
                TruthOracle::Integral => "integral".to_string(),
                TruthOracle::MonteCarlo => "mc".to_string(),
            },
            max_iter,
            tol,
        },
        horizon,
        rows,
    };
    write_artifact(out.as_deref(), &artifact)
}

// ---------------------------------------------------------------------
// simulate-table2
// ---------------------------------------------------------------------

#[derive(Serialize)]
struct Table2Resolved {
    n: usize,
    seed: u64,
    horizon_quantile: f64,
    max_iter: usize,
    tol: f64,
}

#[derive(Serialize)]
struct Table2Artifact {
    config: Table2Resolved,
    comparison: jcsurv::study::ComparisonReport,
}

pub fn simulate_table2(args: Table2Args) -> Result<(), CliError> {
    let file = FileConfig::load(args.config.as_deref())?;
    let n = resolve(&args.n, &file, "n", 100_000)?;
    let seed = resolve(&args.seed, &file, "seed", 0)?;
    let quantile = resolve(&args.horizon_quantile, &file, "horizon_quantile", 0.75)?;
    let max_iter = resolve(&args.max_iter, &file, "max_iter", 100)?;
    let tol = resolve(&args.tol, &file, "tol", 1e-8)?;
    let out = resolve_opt(&args.out, &file, "out")?;
    file.finish()?;

    let comparison = model_comparison(&ComparisonConfig {
        n,
        horizon_quantile: quantile,
        seed,
        fit: FitConfig { max_iter, tol },
    })?;

    let rows: Vec<Vec<String>> = comparison
        .rows
        .iter()
        .map(|row| {
            vec![
                row.model.clone(),
                fmt(row.report.concordance_per_event[0]),
                fmt(row.report.concordance_per_event[1]),
                fmt(row.report.accuracy),
                fmt(row.report.joint_concordance),
            ]
        })
        .collect();
    print!(
        "{}",
        table::render(
            &[
                "model".into(),
                "concordance_1".into(),
                "concordance_2".into(),
                "accuracy".into(),
                "joint_concordance".into(),
            ],
            &rows
        )
    );

    let artifact = Table2Artifact {
        config: Table2Resolved {
            n,
            seed,
            horizon_quantile: quantile,
            max_iter,
            tol,
        },
        comparison,
    };
    write_artifact(out.as_deref(), &artifact)
}

// ---------------------------------------------------------------------
// rank-variables
// ---------------------------------------------------------------------

#[derive(Serialize)]
struct RankResolved {
    data: String,
    methods: Vec<String>,
    horizon_quantile: f64,
    horizon: f64,
    eval: String,
    folds: Option<usize>,
    eval_seed: Option<u64>,
    max_iter: usize,
    tol: f64,
}

#[derive(Serialize)]
struct RankArtifact {
    config: RankResolved,
    results: Vec<RankingResult>,
}

pub fn rank_variables(args: RankArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.config.as_deref())?;
    let data = require_path(args.data.clone().or(file.get::<PathBuf>("data")?), "--data")?;
    let methods = args
        .methods
        .clone()
        .or(file.get_list::<String>("methods")?)
        .unwrap_or_else(|| vec!["stepwise_cr".to_string()]);
    let quantile = resolve(&args.horizon_quantile, &file, "horizon_quantile", 0.75)?;
    let horizon_flag = resolve_opt(&args.horizon, &file, "horizon")?;
    let eval = resolve(&args.eval, &file, "eval", "in-sample".to_string())?;
    let folds = resolve_opt(&args.folds, &file, "folds")?;
    let eval_seed = resolve_opt(&args.eval_seed, &file, "eval_seed")?;
    let max_iter = resolve(&args.max_iter, &file, "max_iter", 100)?;
    let tol = resolve(&args.tol, &file, "tol", 1e-8)?;
    let out = resolve_opt(&args.out, &file, "out")?;
    file.finish()?;

    let ds = Dataset::from_csv_path(&data)?;
    let horizon = match horizon_flag {
        Some(h) => h,
        None => evaluation_horizon(&ds, quantile)?,
    };
    let scheme = match eval.as_str() {
        "in-sample" => EvalScheme::InSample,
        "kfold" => EvalScheme::KFold {
            folds: folds.unwrap_or(5),
            seed: eval_seed.unwrap_or(0),
        },
        other => {
            return Err(CliError::usage(format!(
                "unknown evaluation scheme `{other}` (expected in-sample or kfold)"
            )))
        }
    };
    let rank_cfg = RankConfig {
        fit: FitConfig { max_iter, tol },
        eval: scheme,
    };

    if ds.n_covariates() == 1 {
        eprintln!("warning: single covariate; the ranking is trivial");
    }

    let mut results = Vec::new();
    for method in &methods {
        let result = match method.as_str() {
            "stepwise_cr" => stepwise_cr_rank(&ds, horizon, &rank_cfg)?,
            "stepwise_lumped" => stepwise_lumped_rank(&ds, horizon, &rank_cfg)?,
            "standardized_coef" => {
                standardized_coef_rank(&ds, horizon, &FitConfig { max_iter, tol })?
            }
            other => {
                return Err(CliError::usage(format!(
                    "unknown ranking method `{other}`"
                )))
            }
        };
        for failure in &result.fit_failures {
            eprintln!(
                "warning: round {} candidate {} failed: {}",
                failure.round, failure.covariate, failure.message
            );
        }
        results.push(result);
    }

    // side-by-side comparison, one column per requested method
    let mut headers = vec!["rank".to_string()];
    headers.extend(results.iter().map(|r| r.method.label().to_string()));
    let rows: Vec<Vec<String>> = (0..ds.n_covariates())
        .map(|rank| {
            let mut row = vec![(rank + 1).to_string()];
            for result in &results {
                row.push(
                    result
                        .entries
                        .get(rank)
                        .map(|e| e.covariate.clone())
                        .unwrap_or_default(),
                );
            }
            row
        })
        .collect();
    print!("{}", table::render(&headers, &rows));

    let artifact = RankArtifact {
        config: RankResolved {
            data: data.display().to_string(),
            methods,
            horizon_quantile: quantile,
            horizon,
            eval,
            folds,
            eval_seed,
            max_iter,
            tol,
        },
        results,
    };
    write_artifact(out.as_deref(), &artifact)
}
