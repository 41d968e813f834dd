//! Variable-importance ranking for competing-risks data.
//!
//! The proposed method refits a cause-specific model with each remaining
//! covariate removed in turn and eliminates the one whose removal changes
//! the joint concordance least; the covariate surviving longest matters
//! most. Two conventional baselines are provided: the same backward
//! elimination on the event-lumped data under plain concordance, and
//! ranking by standardized coefficient magnitudes of the lumped fit.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::censoring::{fit_km_censoring, CensoringError};
use crate::data::Dataset;
use crate::metrics::{weighted_joint_concordance, MetricsError};
use crate::models::{fit_cause_specific, FitConfig, FitError};

#[derive(Debug, Error)]
pub enum RankError {
    #[error("dataset has no covariates to rank")]
    NoCovariates,
    #[error("k-fold evaluation needs at least 2 folds, got {0}")]
    BadFoldCount(usize),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Censoring(#[from] CensoringError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankMethod {
    StepwiseCr,
    StepwiseLumped,
    StandardizedCoef,
}

impl RankMethod {
    pub fn label(&self) -> &'static str {
        match self {
            RankMethod::StepwiseCr => "stepwise_cr",
            RankMethod::StepwiseLumped => "stepwise_lumped",
            RankMethod::StandardizedCoef => "standardized_coef",
        }
    }
}

/// How candidate models are scored during backward elimination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EvalScheme {
    /// Fit and evaluate on the full dataset (the default).
    InSample,
    /// Deterministic k-fold cross-validation: the reported metric is the
    /// mean held-out joint concordance across folds.
    KFold { folds: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy)]
pub struct RankConfig {
    pub fit: FitConfig,
    pub eval: EvalScheme,
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig {
            fit: FitConfig::default(),
            eval: EvalScheme::InSample,
        }
    }
}

/// One ranked covariate. `elimination_round` is the round in which the
/// covariate was dropped (1 = first dropped = least important); the final
/// covariate is assigned round `d` without being refit, so its metric
/// fields are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub covariate: String,
    pub elimination_round: usize,
    /// Stepwise methods: the metric of the refit without this covariate.
    /// Coefficient ranking: the standardized coefficient magnitude.
    pub metric_value: Option<f64>,
    /// Stepwise methods: |metric after removal - metric before|.
    pub metric_delta: Option<f64>,
}

/// A candidate refit that failed; the candidate's removal was deferred.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitFailureNote {
    pub round: usize,
    pub covariate: String,
    pub message: String,
}

/// Ranking output, ordered most important first (rank 1 = dropped last).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingResult {
    pub method: RankMethod,
    pub entries: Vec<RankEntry>,
    pub fit_failures: Vec<FitFailureNote>,
}

impl RankingResult {
    /// 1-based rank of a covariate (1 = most important).
    pub fn rank_of(&self, covariate: &str) -> Option<usize> {
        self.entries
            .iter()
            .position(|e| e.covariate == covariate)
            .map(|p| p + 1)
    }
}

/// Backward elimination on cause-specific fits under the joint concordance.
pub fn stepwise_cr_rank(
    ds: &Dataset,
    horizon: f64,
    config: &RankConfig,
) -> Result<RankingResult, RankError> {
    stepwise(ds, horizon, config, RankMethod::StepwiseCr)
}

/// Backward elimination after lumping every event type into one, scored by
/// the single-event concordance (which the joint concordance reduces to
/// when only one event type exists).
pub fn stepwise_lumped_rank(
    ds: &Dataset,
    horizon: f64,
    config: &RankConfig,
) -> Result<RankingResult, RankError> {
    stepwise(&ds.lump_events(), horizon, config, RankMethod::StepwiseLumped)
}

fn stepwise(
    ds: &Dataset,
    horizon: f64,
    config: &RankConfig,
    method: RankMethod,
) -> Result<RankingResult, RankError> {
    let d = ds.n_covariates();
    if d == 0 {
        return Err(RankError::NoCovariates);
    }
    if let EvalScheme::KFold { folds, .. } = config.eval {
        if folds < 2 {
            return Err(RankError::BadFoldCount(folds));
        }
    }

    let mut remaining: Vec<usize> = (0..d).collect();
    let mut eliminated: Vec<RankEntry> = Vec::new();
    let mut fit_failures: Vec<FitFailureNote> = Vec::new();
    // the current model's metric; recomputed lazily after a deferred round
    let mut current_metric: Option<f64> = None;

    for round in 1..d {
        let baseline = match current_metric {
            Some(m) => m,
            None => evaluate_subset(ds, &remaining, horizon, config)?,
        };
        let candidates: Vec<(usize, Result<f64, RankError>)> = remaining
            .par_iter()
            .map(|&v| {
                let subset: Vec<usize> =
                    remaining.iter().copied().filter(|&u| u != v).collect();
                (v, evaluate_subset(ds, &subset, horizon, config))
            })
            .collect();

        let mut best: Option<(usize, f64, f64)> = None; // (covariate, metric, |delta|)
        for (v, outcome) in candidates {
            match outcome {
                Ok(metric) => {
                    let delta = (metric - baseline).abs();
                    let better = match best {
                        None => true,
                        Some((_, _, best_delta)) => delta < best_delta,
                    };
                    if better {
                        best = Some((v, metric, delta));
                    }
                }
                Err(err) => fit_failures.push(FitFailureNote {
                    round,
                    covariate: ds.covariate_names()[v].clone(),
                    message: err.to_string(),
                }),
            }
        }

        match best {
            Some((v, metric, delta)) => {
                eliminated.push(RankEntry {
                    covariate: ds.covariate_names()[v].clone(),
                    elimination_round: round,
                    metric_value: Some(metric),
                    metric_delta: Some(delta),
                });
                remaining.retain(|&u| u != v);
                current_metric = Some(metric);
            }
            None => {
                // every candidate failed; drop the earliest by covariate
                // order so the elimination can proceed
                let v = remaining.remove(0);
                eliminated.push(RankEntry {
                    covariate: ds.covariate_names()[v].clone(),
                    elimination_round: round,
                    metric_value: None,
                    metric_delta: None,
                });
                current_metric = None;
            }
        }
    }

    let last = remaining[0];
    eliminated.push(RankEntry {
        covariate: ds.covariate_names()[last].clone(),
        elimination_round: d,
        metric_value: None,
        metric_delta: None,
    });
    eliminated.reverse(); // most important first
    Ok(RankingResult {
        method,
        entries: eliminated,
        fit_failures,
    })
}

/// Joint concordance of a cause-specific fit restricted to `subset`.
fn evaluate_subset(
    ds: &Dataset,
    subset: &[usize],
    horizon: f64,
    config: &RankConfig,
) -> Result<f64, RankError> {
    if subset.is_empty() {
        return Err(RankError::NoCovariates);
    }
    let projected = ds.project_covariates(subset);
    match config.eval {
        EvalScheme::InSample => {
            let model = fit_cause_specific(&projected, &config.fit)?;
            let g = fit_km_censoring(&projected)?;
            Ok(weighted_joint_concordance(&projected, &model, &g, horizon)?.joint_concordance)
        }
        EvalScheme::KFold { folds, seed } => {
            let n = projected.len();
            let mut assignment: Vec<usize> = (0..n).map(|i| i % folds).collect();
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            assignment.shuffle(&mut rng);
            let mut total = 0.0;
            for fold in 0..folds {
                let train: Vec<_> = projected
                    .records()
                    .iter()
                    .zip(&assignment)
                    .filter(|(_, &a)| a != fold)
                    .map(|(r, _)| r.clone())
                    .collect();
                let test: Vec<_> = projected
                    .records()
                    .iter()
                    .zip(&assignment)
                    .filter(|(_, &a)| a == fold)
                    .map(|(r, _)| r.clone())
                    .collect();
                let train_ds = Dataset::from_parts_unchecked(
                    train,
                    projected.covariate_names().to_vec(),
                    projected.n_event_types(),
                );
                let test_ds = Dataset::from_parts_unchecked(
                    test,
                    projected.covariate_names().to_vec(),
                    projected.n_event_types(),
                );
                let model = fit_cause_specific(&train_ds, &config.fit)?;
                let g = fit_km_censoring(&test_ds)?;
                total +=
                    weighted_joint_concordance(&test_ds, &model, &g, horizon)?.joint_concordance;
            }
            Ok(total / folds as f64)
        }
    }
}

/// Rank covariates of the lumped fit by `|coefficient| * sd(covariate)`,
/// descending; ties keep covariate order. Scale-free by construction.
pub fn standardized_coef_rank(
    ds: &Dataset,
    _horizon: f64,
    fit: &FitConfig,
) -> Result<RankingResult, RankError> {
    let d = ds.n_covariates();
    if d == 0 {
        return Err(RankError::NoCovariates);
    }
    let lumped = ds.lump_events();
    let model = fit_cause_specific(&lumped, fit)?;
    let beta = model.coefficients(crate::data::EventLabel::new(1));

    let n = lumped.len() as f64;
    let mut scores = Vec::with_capacity(d);
    for (j, b) in beta.iter().enumerate() {
        let mean: f64 = lumped.records().iter().map(|r| r.covariates[j]).sum::<f64>() / n;
        let ss: f64 = lumped
            .records()
            .iter()
            .map(|r| (r.covariates[j] - mean).powi(2))
            .sum();
        let sd = (ss / (n - 1.0)).sqrt();
        scores.push(b.abs() * sd);
    }

    let mut order: Vec<usize> = (0..d).collect();
    // stable sort keeps covariate order on ties
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
    let entries = order
        .iter()
        .enumerate()
        .map(|(rank, &j)| RankEntry {
            covariate: ds.covariate_names()[j].clone(),
            elimination_round: d - rank,
            metric_value: Some(scores[j]),
            metric_delta: None,
        })
        .collect();
    Ok(RankingResult {
        method: RankMethod::StandardizedCoef,
        entries,
        fit_failures: Vec::new(),
    })
}
