//! Replicate-study drivers: the estimator-efficiency study (RMSE / SE /
//! bias of the weighted joint concordance against ground truth) and the
//! large-cohort model comparison. These back the command-line harness and
//! are callable directly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::censoring::fit_km_censoring;
use crate::data::{evaluation_horizon, DataError};
use crate::metrics::{joint_concordance, weighted_joint_concordance, MetricReport, MetricsError};
use crate::models::{fit_cause_specific, ExpModel, FitConfig, FitError};
use crate::risk::RiskModel;
use crate::synth::{calibrate_censoring_rate, generate, true_jc_integral, SynthConfig, SynthError};

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("need at least 2 replicates, got {0}")]
    TooFewReplicates(usize),
    #[error("censoring target {0} outside [0, 1)")]
    BadCensoringTarget(f64),
    #[error("every replicate failed; nothing to aggregate")]
    AllReplicatesFailed,
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

/// Which risk model a study evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    Exp,
    Csc,
}

impl ModelChoice {
    pub fn label(&self) -> &'static str {
        match self {
            ModelChoice::Exp => "exp",
            ModelChoice::Csc => "csc",
        }
    }
}

/// Where the study's ground-truth joint concordance comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthOracle {
    /// Numerical integration of the generator's closed-form incidence
    /// curves. Deterministic; the default for the closed-form model.
    Integral,
    /// Uncensored large-sample evaluation on the truth cohort.
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EfficiencyConfig {
    pub model: ModelChoice,
    /// Target censored fraction in [0, 1); 0 disables censoring.
    pub censoring_rate: f64,
    /// Covariate effect on the censoring hazard.
    pub beta0: f64,
    /// Replicate sample size.
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    pub horizon_quantile: f64,
    /// Size of the uncensored cohort fixing the horizon and, for the
    /// Monte Carlo oracle, the truth.
    pub n_truth: usize,
    pub truth: TruthOracle,
    pub fit: FitConfig,
}

impl EfficiencyConfig {
    pub fn new(model: ModelChoice, censoring_rate: f64, n: usize, replicates: usize, seed: u64) -> Self {
        EfficiencyConfig {
            model,
            censoring_rate,
            beta0: 0.0,
            n,
            replicates,
            seed,
            horizon_quantile: 0.75,
            n_truth: 100_000,
            truth: match model {
                ModelChoice::Exp => TruthOracle::Integral,
                ModelChoice::Csc => TruthOracle::MonteCarlo,
            },
            fit: FitConfig::default(),
        }
    }
}

/// Aggregated estimator performance for one (model, censoring rate, n)
/// configuration.
///
/// `se` and `rmse` use the population normalization (divide by the number
/// of replicates), so `rmse^2 = se^2 + bias^2` holds as an identity of the
/// sample moments up to floating-point accumulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyRow {
    pub model: String,
    pub censoring_rate: f64,
    pub n: usize,
    pub replicates_requested: usize,
    pub replicates_used: usize,
    pub true_jc: f64,
    pub mean_estimate: f64,
    pub rmse: f64,
    pub se: f64,
    pub bias: f64,
    /// Per-replicate weighted joint concordance, in replicate order.
    pub estimates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub horizon: f64,
    pub rows: Vec<EfficiencyRow>,
}

/// Run one efficiency configuration: fix the horizon and truth on an
/// uncensored cohort, then generate `replicates` censored datasets
/// (streams `1..=replicates` of the seed), fit the censoring model on each,
/// and evaluate the weighted joint concordance in-sample.
pub fn efficiency_study(cfg: &EfficiencyConfig) -> Result<(f64, EfficiencyRow), StudyError> {
    if cfg.replicates < 2 {
        return Err(StudyError::TooFewReplicates(cfg.replicates));
    }
    if !(0.0..1.0).contains(&cfg.censoring_rate) {
        return Err(StudyError::BadCensoringTarget(cfg.censoring_rate));
    }

    let truth_cfg = SynthConfig::uncensored(cfg.n_truth, cfg.seed);
    let truth_ds = generate(&truth_cfg);
    let horizon = evaluation_horizon(&truth_ds, cfg.horizon_quantile)?;

    // the model under study; the cause-specific model is refit on every
    // replicate, its truth value comes from the large-cohort fit
    let truth_model: Box<dyn RiskModel + Send> = match cfg.model {
        ModelChoice::Exp => Box::new(ExpModel),
        ModelChoice::Csc => Box::new(fit_cause_specific(&truth_ds, &cfg.fit)?),
    };
    let true_jc = match cfg.truth {
        TruthOracle::Integral => true_jc_integral(truth_model.as_ref(), horizon)?,
        TruthOracle::MonteCarlo => {
            joint_concordance(&truth_ds, truth_model.as_ref(), horizon)?.joint_concordance
        }
    };

    let lambda0 = if cfg.censoring_rate == 0.0 {
        0.0
    } else {
        calibrate_censoring_rate(&truth_cfg, cfg.censoring_rate, 1e-4)?
    };

    let outcomes: Vec<Option<f64>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let gen_cfg = SynthConfig {
                n: cfg.n,
                ..truth_cfg
            }
            .with_censoring(lambda0, cfg.beta0)
            .with_stream(r as u64 + 1);
            let ds = generate(&gen_cfg);
            let g = fit_km_censoring(&ds).ok()?;
            let estimate = match cfg.model {
                ModelChoice::Exp => {
                    weighted_joint_concordance(&ds, &ExpModel, &g, horizon).ok()?
                }
                ModelChoice::Csc => {
                    let model = fit_cause_specific(&ds, &cfg.fit).ok()?;
                    weighted_joint_concordance(&ds, &model, &g, horizon).ok()?
                }
            };
            Some(estimate.joint_concordance)
        })
        .collect();

    let estimates: Vec<f64> = outcomes.iter().copied().flatten().collect();
    if estimates.is_empty() {
        return Err(StudyError::AllReplicatesFailed);
    }
    let used = estimates.len();
    let r = used as f64;
    let mean_estimate = estimates.iter().sum::<f64>() / r;
    let bias = mean_estimate - true_jc;
    let se = (estimates
        .iter()
        .map(|e| (e - mean_estimate).powi(2))
        .sum::<f64>()
        / r)
        .sqrt();
    let rmse = (estimates.iter().map(|e| (e - true_jc).powi(2)).sum::<f64>() / r).sqrt();

    Ok((
        horizon,
        EfficiencyRow {
            model: cfg.model.label().to_string(),
            censoring_rate: cfg.censoring_rate,
            n: cfg.n,
            replicates_requested: cfg.replicates,
            replicates_used: used,
            true_jc,
            mean_estimate,
            rmse,
            se,
            bias,
            estimates,
        },
    ))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ComparisonConfig {
    pub n: usize,
    pub horizon_quantile: f64,
    pub seed: u64,
    pub fit: FitConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: String,
    pub report: MetricReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub n: usize,
    pub horizon: f64,
    pub rows: Vec<ComparisonRow>,
}

/// Generate one large uncensored cohort, evaluate the closed-form model
/// and a freshly fit cause-specific model on it with the uncensored
/// estimators, and report both.
pub fn model_comparison(cfg: &ComparisonConfig) -> Result<ComparisonReport, StudyError> {
    let ds = generate(&SynthConfig::uncensored(cfg.n, cfg.seed));
    let horizon = evaluation_horizon(&ds, cfg.horizon_quantile)?;
    let exp_report = joint_concordance(&ds, &ExpModel, horizon)?;
    let csc = fit_cause_specific(&ds, &cfg.fit)?;
    let csc_report = joint_concordance(&ds, &csc, horizon)?;
    Ok(ComparisonReport {
        n: cfg.n,
        horizon,
        rows: vec![
            ComparisonRow {
                model: "exp".to_string(),
                report: exp_report,
            },
            ComparisonRow {
                model: "csc".to_string(),
                report: csc_report,
            },
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn efficiency_moments_satisfy_the_square_identity() {
        let cfg = EfficiencyConfig {
            n: 400,
            n_truth: 100_000,
            ..EfficiencyConfig::new(ModelChoice::Exp, 0.3, 400, 4, 99)
        };
        let (horizon, row) = efficiency_study(&cfg).unwrap();
        assert!(horizon > 0.0);
        assert_eq!(row.replicates_used, 4);
        assert_eq!(row.estimates.len(), 4);
        let gap = row.rmse.powi(2) - row.se.powi(2) - row.bias.powi(2);
        assert!(gap.abs() < 1e-10, "identity gap {gap}");
        assert_eq!(row.model, "exp");
    }

    #[test]
    fn zero_censoring_study_runs_without_calibration() {
        let cfg = EfficiencyConfig::new(ModelChoice::Exp, 0.0, 500, 3, 7);
        let (_, row) = efficiency_study(&cfg).unwrap();
        assert_eq!(row.replicates_used, 3);
        let gap = row.rmse.powi(2) - row.se.powi(2) - row.bias.powi(2);
        assert!(gap.abs() < 1e-10);
    }

    #[test]
    fn config_preconditions_are_enforced() {
        assert!(matches!(
            efficiency_study(&EfficiencyConfig::new(ModelChoice::Exp, 0.5, 100, 1, 1)),
            Err(StudyError::TooFewReplicates(1))
        ));
        assert!(matches!(
            efficiency_study(&EfficiencyConfig::new(ModelChoice::Exp, 1.0, 100, 5, 1)),
            Err(StudyError::BadCensoringTarget(_))
        ));
    }

    #[test]
    fn comparison_reports_both_models() {
        let report = model_comparison(&ComparisonConfig {
            n: 4000,
            horizon_quantile: 0.75,
            seed: 5,
            fit: FitConfig::default(),
        })
        .unwrap();
        assert_eq!(report.rows.len(), 2);
        assert_eq!(report.rows[0].model, "exp");
        assert_eq!(report.rows[1].model, "csc");
        for row in &report.rows {
            assert_eq!(row.report.concordance_per_event.len(), 2);
            assert!(row.report.joint_concordance > 0.0 && row.report.joint_concordance < 1.0);
        }
        // identical configuration reproduces identical bytes
        let again = model_comparison(&ComparisonConfig {
            n: 4000,
            horizon_quantile: 0.75,
            seed: 5,
            fit: FitConfig::default(),
        })
        .unwrap();
        assert_eq!(
            serde_json::to_string(&report).unwrap(),
            serde_json::to_string(&again).unwrap()
        );
    }
}
