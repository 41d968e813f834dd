//! `jcsurv` - evaluate competing-risks models, reproduce the synthetic
//! benchmark tables, and rank covariates, from the command line.
//!
//! Every run resolves its configuration from defaults, an optional
//! `key = value` file, and flags (flags win), embeds the resolved
//! configuration in its output artifact, and derives all randomness from
//! one seed, so identical invocations produce identical bytes.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical
//! failure. Failures print a machine-readable JSON object to stderr.

mod commands;
mod config;
mod table;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub code: i32,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: 1,
        }
    }
    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: 2,
        }
    }
    pub fn numeric(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.code {
            1 => "usage",
            2 => "data",
            _ => "numerical",
        }
    }
}

impl From<jcsurv::DataError> for CliError {
    fn from(e: jcsurv::DataError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<jcsurv::CensoringError> for CliError {
    fn from(e: jcsurv::CensoringError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<jcsurv::ModelError> for CliError {
    fn from(e: jcsurv::ModelError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<jcsurv::MetricsError> for CliError {
    fn from(e: jcsurv::MetricsError) -> Self {
        use jcsurv::MetricsError::*;
        match e {
            CensoredData | UnknownEventType { .. } | Model(_) => CliError::data(e.to_string()),
            InvalidBootstrap(_) => CliError::usage(e.to_string()),
            _ => CliError::numeric(e.to_string()),
        }
    }
}

impl From<jcsurv::models::FitError> for CliError {
    fn from(e: jcsurv::models::FitError) -> Self {
        match e {
            jcsurv::models::FitError::Deserialize(_) => CliError::data(e.to_string()),
            _ => CliError::numeric(e.to_string()),
        }
    }
}

impl From<jcsurv::synth::SynthError> for CliError {
    fn from(e: jcsurv::synth::SynthError) -> Self {
        use jcsurv::synth::SynthError::*;
        match e {
            InvalidTarget(_) | SampleTooSmall(_) => CliError::usage(e.to_string()),
            Data(inner) => inner.into(),
            Metrics(inner) => inner.into(),
            _ => CliError::numeric(e.to_string()),
        }
    }
}

impl From<jcsurv::study::StudyError> for CliError {
    fn from(e: jcsurv::study::StudyError) -> Self {
        use jcsurv::study::StudyError::*;
        match e {
            TooFewReplicates(_) | BadCensoringTarget(_) => CliError::usage(e.to_string()),
            Data(inner) => inner.into(),
            Metrics(inner) => inner.into(),
            Fit(inner) => inner.into(),
            Synth(inner) => inner.into(),
            AllReplicatesFailed => CliError::numeric(e.to_string()),
        }
    }
}

impl From<jcsurv::varimp::RankError> for CliError {
    fn from(e: jcsurv::varimp::RankError) -> Self {
        use jcsurv::varimp::RankError::*;
        match e {
            NoCovariates => CliError::data(e.to_string()),
            BadFoldCount(_) => CliError::usage(e.to_string()),
            Fit(inner) => inner.into(),
            Metrics(inner) => inner.into(),
            Censoring(inner) => inner.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    /// Fixed exponential two-risk model (scalar covariate).
    Exp,
    /// Cause-specific proportional hazards, fit on the input data.
    Csc,
    /// Risk scores read from the covariate columns (column k = event k).
    Precomputed,
}

impl std::str::FromStr for ModelKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exp" => Ok(ModelKind::Exp),
            "csc" => Ok(ModelKind::Csc),
            "precomputed" => Ok(ModelKind::Precomputed),
            other => Err(format!("unknown model `{other}`")),
        }
    }
}

impl ModelKind {
    pub fn label(&self) -> &'static str {
        match self {
            ModelKind::Exp => "exp",
            ModelKind::Csc => "csc",
            ModelKind::Precomputed => "precomputed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TieKind {
    /// Tied risk scores are non-concordant (the default).
    Strict,
    /// Tied risk scores earn half credit.
    Half,
}

impl std::str::FromStr for TieKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "strict" => Ok(TieKind::Strict),
            "half" => Ok(TieKind::Half),
            other => Err(format!("unknown tie rule `{other}`")),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "jcsurv",
    version,
    about = "Competing-risks model evaluation: joint concordance, benchmarks, variable ranking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a risk model on a dataset (censoring-adjusted metrics).
    Evaluate(EvaluateArgs),
    /// Fit a cause-specific proportional-hazards model and save it as JSON.
    Fit(FitArgs),
    /// Draw a synthetic dataset (and optionally its ground-truth report).
    Simulate(SimulateArgs),
    /// Estimator efficiency study: RMSE / SE / bias over replicates.
    #[command(name = "simulate-table1")]
    SimulateTable1(Table1Args),
    /// Large-cohort model comparison of the built-in models.
    #[command(name = "simulate-table2")]
    SimulateTable2(Table2Args),
    /// Rank covariates by importance.
    #[command(name = "rank-variables")]
    RankVariables(RankArgs),
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// key = value configuration file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input CSV: id,time,event,<covariates...>
    #[arg(long)]
    data: Option<PathBuf>,
    /// Built-in model choice
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    /// Load a fitted model from JSON instead of `--model`
    #[arg(long)]
    model_file: Option<PathBuf>,
    /// Horizon as a quantile of the observed times
    #[arg(long)]
    horizon_quantile: Option<f64>,
    /// Explicit horizon (overrides the quantile)
    #[arg(long)]
    horizon: Option<f64>,
    /// Tie handling for risk scores
    #[arg(long, value_enum)]
    ties: Option<TieKind>,
    /// Bootstrap replicates for confidence intervals (>= 100)
    #[arg(long)]
    bootstrap: Option<usize>,
    /// Bootstrap confidence level
    #[arg(long)]
    level: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the JSON report here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct FitArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Write the fitted model JSON here (required)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of subjects
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Independent stream index under the same seed
    #[arg(long)]
    stream: Option<u64>,
    /// Target censored fraction in [0, 1); 0 disables censoring
    #[arg(long)]
    censoring: Option<f64>,
    /// Covariate effect on the censoring hazard
    #[arg(long)]
    beta0: Option<f64>,
    /// Write the dataset CSV here (required)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the uncensored ground-truth metric report here
    #[arg(long)]
    oracle_out: Option<PathBuf>,
    /// Cohort size behind the ground-truth report
    #[arg(long)]
    oracle_n: Option<usize>,
    #[arg(long)]
    horizon_quantile: Option<f64>,
}

#[derive(Args)]
pub struct Table1Args {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model under study: exp or csc
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    /// Target censored fractions (comma separated)
    #[arg(long, value_delimiter = ',')]
    censoring: Option<Vec<f64>>,
    /// Replicate sample sizes (comma separated)
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    beta0: Option<f64>,
    #[arg(long)]
    horizon_quantile: Option<f64>,
    /// Uncensored cohort size fixing the horizon and truth
    #[arg(long)]
    n_truth: Option<usize>,
    /// Ground-truth oracle: integral or mc
    #[arg(long)]
    truth: Option<String>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct Table2Args {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    horizon_quantile: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
pub struct RankArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    /// Ranking methods: stepwise_cr, stepwise_lumped, standardized_coef
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    #[arg(long)]
    horizon_quantile: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    /// Candidate evaluation: in-sample or kfold
    #[arg(long)]
    eval: Option<String>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    eval_seed: Option<u64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders help/version on stdout with success
            if e.use_stderr() {
                let err = CliError::usage(e.to_string());
                report_failure(&err);
                std::process::exit(err.code);
            }
            let _ = e.print();
            return;
        }
    };
    let outcome = match cli.command {
        Command::Evaluate(args) => commands::evaluate(args),
        Command::Fit(args) => commands::fit(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::SimulateTable1(args) => commands::simulate_table1(args),
        Command::SimulateTable2(args) => commands::simulate_table2(args),
        Command::RankVariables(args) => commands::rank_variables(args),
    };
    if let Err(err) = outcome {
        report_failure(&err);
        std::process::exit(err.code);
    }
}

fn report_failure(err: &CliError) {
    let body = serde_json::json!({
        "error": {
            "kind": err.kind(),
            "message": err.message,
        }
    });
    eprintln!("{}", serde_json::to_string_pretty(&body).expect("error json"));
}
