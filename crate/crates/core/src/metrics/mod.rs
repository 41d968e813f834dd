//! Evaluation metrics for competing-risks models: per-event concordance,
//! type-prediction accuracy, the joint concordance and its decomposition,
//! the censoring-adjusted (inverse-probability weighted) variants of each,
//! and percentile bootstrap intervals.
//!
//! The uncensored estimators require data without censored records and
//! count ordered pairs exactly. The weighted estimators accept censored
//! data together with a fitted [`CensoringModel`] and reduce to the
//! uncensored ones when no censoring is present.

mod bootstrap;
mod counting;
pub mod report;
mod weighted;

pub use bootstrap::{bootstrap_ci, bootstrap_cis_all};
pub use report::{
    BootstrapCis, ConfidenceInterval, JointTally, MetricReport, MetricSelector, PairCounts, Tally,
};
pub use weighted::PairIndicators;

use rayon::prelude::*;
use thiserror::Error;

use crate::censoring::CensoringModel;
use crate::data::{Dataset, EventLabel};
use crate::risk::{ModelError, RiskModel};
use counting::EventTallies;
use weighted::CensoringWeights;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("no comparable pairs for {metric}")]
    NoComparablePairs { metric: String },
    #[error("no subjects observed at or before the horizon")]
    NoSubjectsBeforeHorizon,
    #[error("censoring survival is zero at time {time}; weight undefined")]
    ZeroCensoringSurvival { time: f64 },
    #[error("uncensored estimator applied to data with censored records")]
    CensoredData,
    #[error("event type {code} outside 1..={n_event_types}")]
    UnknownEventType { code: u32, n_event_types: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("bootstrap configuration invalid: {0}")]
    InvalidBootstrap(String),
}

/// How tied risk scores count in the concordance numerators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieRule {
    /// Ties are non-concordant (strict inequality). The default.
    #[default]
    Strict,
    /// Ties earn half credit, for comparability with other toolkits.
    HalfCredit,
}

impl TieRule {
    fn credit(self) -> f64 {
        match self {
            TieRule::Strict => 0.0,
            TieRule::HalfCredit => 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MetricOptions {
    pub tie_rule: TieRule,
}

/// Model outputs evaluated once per subject: the `n x K` score matrix and
/// the predicted type codes.
struct ModelEval {
    risks: Vec<f64>,
    predicted: Vec<u32>,
}

fn evaluate_model<M: RiskModel + ?Sized>(
    ds: &Dataset,
    model: &M,
    horizon: f64,
) -> Result<ModelEval, MetricsError> {
    model.check_compatible(ds.n_covariates(), ds.n_event_types())?;
    let k = ds.n_event_types();
    let rows: Vec<(Vec<f64>, u32)> = ds
        .records()
        .par_iter()
        .map(|r| {
            let scores = model.risks_at(&r.covariates, horizon);
            debug_assert_eq!(scores.len(), k);
            let predicted = model.predict_type_from_scores(&scores).code();
            (scores, predicted)
        })
        .collect();
    let mut risks = Vec::with_capacity(ds.len() * k);
    let mut predicted = Vec::with_capacity(ds.len());
    for (scores, p) in rows {
        risks.extend_from_slice(&scores);
        predicted.push(p);
    }
    Ok(ModelEval { risks, predicted })
}

fn require_uncensored(ds: &Dataset) -> Result<(), MetricsError> {
    if ds.has_censoring() {
        Err(MetricsError::CensoredData)
    } else {
        Ok(())
    }
}

fn require_event(ds: &Dataset, event: EventLabel) -> Result<(), MetricsError> {
    let code = event.code();
    if code == 0 || code as usize > ds.n_event_types() {
        return Err(MetricsError::UnknownEventType {
            code,
            n_event_types: ds.n_event_types(),
        });
    }
    Ok(())
}

fn times_and_codes(ds: &Dataset) -> (Vec<f64>, Vec<u32>) {
    let times = ds.records().iter().map(|r| r.time).collect();
    let codes = ds.records().iter().map(|r| r.event.code()).collect();
    (times, codes)
}

fn assemble_report(
    horizon: f64,
    n_event_types: usize,
    per_event: &[EventTallies],
    accuracy_num: f64,
    accuracy_den: f64,
) -> Result<MetricReport, MetricsError> {
    let mut concordance_per_event = Vec::with_capacity(n_event_types);
    let mut tallies = Vec::with_capacity(n_event_types);
    for (idx, t) in per_event.iter().enumerate() {
        if t.den_all == 0.0 {
            return Err(MetricsError::NoComparablePairs {
                metric: format!("concordance for event type {}", idx + 1),
            });
        }
        concordance_per_event.push(t.num_all / t.den_all);
        tallies.push(Tally {
            numerator: t.num_all,
            denominator: t.den_all,
        });
    }
    if accuracy_den == 0.0 {
        return Err(MetricsError::NoSubjectsBeforeHorizon);
    }
    let joint = JointTally {
        concordant: per_event.iter().map(|t| t.num_correct).sum(),
        correct: per_event.iter().map(|t| t.den_correct).sum(),
        comparable: per_event.iter().map(|t| t.den_all).sum(),
    };
    // comparable > 0 here since every per-event denominator is positive
    let joint_concordance = joint.concordant / joint.comparable;
    let accuracy_star = joint.correct / joint.comparable;
    let conditional_concordance = if joint.correct > 0.0 {
        joint.concordant / joint.correct
    } else {
        0.0
    };
    Ok(MetricReport {
        horizon,
        n_event_types,
        concordance_per_event,
        accuracy: accuracy_num / accuracy_den,
        joint_concordance,
        conditional_concordance,
        accuracy_star,
        pair_counts: PairCounts {
            concordance_per_event: tallies,
            accuracy: Tally {
                numerator: accuracy_num,
                denominator: accuracy_den,
            },
            joint,
        },
        bootstrap_ci: None,
    })
}

fn uncensored_tallies<M: RiskModel + ?Sized>(
    ds: &Dataset,
    model: &M,
    horizon: f64,
    opts: &MetricOptions,
    only_event: Option<u32>,
) -> Result<(Vec<EventTallies>, f64, f64), MetricsError> {
    let eval = evaluate_model(ds, model, horizon)?;
    let (times, codes) = times_and_codes(ds);
    let k = ds.n_event_types();
    let correct: Vec<bool> = codes
        .iter()
        .zip(&eval.predicted)
        .map(|(&c, &p)| c == p)
        .collect();
    let credit = opts.tie_rule.credit();
    let per_event: Vec<EventTallies> = (1..=k as u32)
        .map(|d| {
            if only_event.is_some_and(|only| only != d) {
                return EventTallies::default();
            }
            let risk_col: Vec<f64> = (0..ds.len())
                .map(|i| eval.risks[i * k + (d - 1) as usize])
                .collect();
            counting::uncensored_event_tallies(
                &times, &codes, &risk_col, &correct, horizon, d, credit,
            )
        })
        .collect();
    let mut acc_num = 0.0;
    let mut acc_den = 0.0;
    for i in 0..ds.len() {
        if times[i] <= horizon {
            acc_den += 1.0;
            if correct[i] {
                acc_num += 1.0;
            }
        }
    }
    Ok((per_event, acc_num, acc_den))
}

fn weighted_tallies<M: RiskModel + ?Sized>(
    ds: &Dataset,
    model: &M,
    g: &CensoringModel,
    horizon: f64,
    opts: &MetricOptions,
    only_event: Option<u32>,
) -> Result<(Vec<EventTallies>, f64, f64), MetricsError> {
    let eval = evaluate_model(ds, model, horizon)?;
    let (times, codes) = times_and_codes(ds);
    let weights = CensoringWeights::evaluate(&times, g);
    let per_event = weighted::weighted_event_tallies(
        &times,
        &codes,
        &eval.risks,
        &eval.predicted,
        &weights,
        horizon,
        ds.n_event_types(),
        opts.tie_rule.credit(),
        only_event,
    )?;
    let (acc_num, acc_den) =
        weighted::weighted_accuracy_tallies(&times, &codes, &eval.predicted, &weights, horizon)?;
    Ok((per_event, acc_num, acc_den))
}

/// Time-dependent concordance for one event type on uncensored data.
pub fn concordance<M: RiskModel + ?Sized>(
    ds: &Dataset,
    model: &M,
    horizon: f64,
    event: EventLabel,
) -> Result<f64, MetricsError> {
    concordance_opts(ds, model, horizon, event, &MetricOptions::default())
}

pub fn concordance_opts<M: RiskModel + ?Sized>(
    ds: &Dataset,
    model: &M,
    horizon: f64,
    event: EventLabel,
    opts: &MetricOptions,
) -> Result<f64, MetricsError> {
    require_uncensored(ds)?;
    require_event(ds, event)?;
    let (per_event, _, _) = uncensored_tallies(ds, model, horizon, opts, Some(event.code()))?;
    let t = &per_event[event.index().unwrap()];
    if t.den_all == 0.0 {
        return Err(MetricsError::NoComparablePairs {
            metric: format!("concordance for event type {}", event.code()),
        });
    }
    Ok(t.num_all / t.den_all)
}

/// Type-prediction accuracy among subjects whose event occurred by the
/// horizon, on uncensored data.
pub fn accuracy<M: RiskModel + ?Sized>(
    ds: &Dataset,
    model: &M,
    horizon: f64,
) -> Result<f64, MetricsError> {
    require_uncensored(ds)?;
    let eval = evaluate_model(ds, model, horizon)?;
    let mut num = 0u64;
    let mut den = 0u64;
    for (r, &p) in ds.records().iter().zip(&eval.predicted) {
        if r.time <= horizon {
            den += 1;
            if r.event.code() == p {
                num += 1;
            }
        }
    }
    if den == 0 {
        return Err(MetricsError::NoSubjectsBeforeHorizon);
    }
    Ok(num as f64 / den as f64)
}

/// Joint concordance on uncensored data, with the full report: per-event
/// concordances, accuracy, the joint metric, and its decomposition into
/// conditional concordance times accuracy*.
pub fn joint_concordance<M: RiskModel + ?Sized>(
    ds: &Dataset,
    model: &M,
    horizon: f64,
) -> Result<MetricReport, MetricsError> {
    joint_concordance_opts(ds, model, horizon, &MetricOptions::default())
}

pub fn joint_concordance_opts<M: RiskModel + ?Sized>(
    ds: &Dataset,
    model: &M,
    horizon: f64,
    opts: &MetricOptions,
) -> Result<MetricReport, MetricsError> {
    require_uncensored(ds)?;
    let (per_event, acc_num, acc_den) = uncensored_tallies(ds, model, horizon, opts, None)?;
    assemble_report(horizon, ds.n_event_types(), &per_event, acc_num, acc_den)
}

/// Censoring-adjusted concordance for one event type.
pub fn weighted_concordance<M: RiskModel + ?Sized>(
    ds: &Dataset,
    model: &M,
    g: &CensoringModel,
    horizon: f64,
    event: EventLabel,
) -> Result<f64, MetricsError> {
    weighted_concordance_opts(ds, model, g, horizon, event, &MetricOptions::default())
}

pub fn weighted_concordance_opts<M: RiskModel + ?Sized>(
    ds: &Dataset,
    model: &M,
    g: &CensoringModel,
    horizon: f64,
    event: EventLabel,
    opts: &MetricOptions,
) -> Result<f64, MetricsError> {
    require_event(ds, event)?;
    let (per_event, _, _) = weighted_tallies(ds, model, g, horizon, opts, Some(event.code()))?;
    let t = &per_event[event.index().unwrap()];
    if t.den_all == 0.0 {
        return Err(MetricsError::NoComparablePairs {
            metric: format!("concordance for event type {}", event.code()),
        });
    }
    Ok(t.num_all / t.den_all)
}

/// Censoring-adjusted accuracy: observed events weighted by the inverse
/// probability of remaining uncensored just before their event time.
pub fn weighted_accuracy<M: RiskModel + ?Sized>(
    ds: &Dataset,
    model: &M,
    g: &CensoringModel,
    horizon: f64,
) -> Result<f64, MetricsError> {
    let eval = evaluate_model(ds, model, horizon)?;
    let (times, codes) = times_and_codes(ds);
    let weights = CensoringWeights::evaluate(&times, g);
    let (num, den) =
        weighted::weighted_accuracy_tallies(&times, &codes, &eval.predicted, &weights, horizon)?;
    if den == 0.0 {
        return Err(MetricsError::NoSubjectsBeforeHorizon);
    }
    Ok(num / den)
}

/// The censoring-adjusted joint concordance with the full weighted report.
///
/// Requires the censoring survival to be positive wherever a weight is
/// taken; violations surface as [`MetricsError::ZeroCensoringSurvival`].
pub fn weighted_joint_concordance<M: RiskModel + ?Sized>(
    ds: &Dataset,
    model: &M,
    g: &CensoringModel,
    horizon: f64,
) -> Result<MetricReport, MetricsError> {
    weighted_joint_concordance_opts(ds, model, g, horizon, &MetricOptions::default())
}

pub fn weighted_joint_concordance_opts<M: RiskModel + ?Sized>(
    ds: &Dataset,
    model: &M,
    g: &CensoringModel,
    horizon: f64,
    opts: &MetricOptions,
) -> Result<MetricReport, MetricsError> {
    let (per_event, acc_num, acc_den) = weighted_tallies(ds, model, g, horizon, opts, None)?;
    assemble_report(horizon, ds.n_event_types(), &per_event, acc_num, acc_den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{validate_dataset, RawRecord};
    use crate::risk::CovariateRiskModel;
    use proptest::prelude::*;

    /// Dataset whose covariates are the per-event risk scores.
    fn scored_dataset(rows: &[(f64, u32, f64, f64)]) -> Dataset {
        let raws = rows
            .iter()
            .enumerate()
            .map(|(i, &(time, event, r1, r2))| RawRecord {
                id: format!("s{i}"),
                time,
                event,
                covariates: vec![r1, r2],
            })
            .collect();
        validate_dataset(raws, vec!["risk1".into(), "risk2".into()]).unwrap()
    }

    fn model2() -> CovariateRiskModel {
        CovariateRiskModel::new(2)
    }

    #[test]
    fn concordance_hand_instance_is_perfect() {
        // risks for type 1: 0.9, 0.1, 0.5; comparable pairs (1,2),(1,3),(3,2)
        let ds = scored_dataset(&[
            (1.0, 1, 0.9, 0.0),
            (2.0, 2, 0.1, 1.0),
            (3.0, 1, 0.5, 0.0),
        ]);
        let c = concordance(&ds, &model2(), 10.0, EventLabel::new(1)).unwrap();
        assert_eq!(c, 1.0);
    }

    #[test]
    fn concordance_perfect_reverse_ordering() {
        // all subjects type 1, risks ordered exactly opposite to times
        let ds = scored_dataset(&[
            (1.0, 1, 0.9, 0.0),
            (2.0, 1, 0.7, 0.0),
            (3.0, 1, 0.5, 0.0),
            (4.0, 1, 0.3, 0.0),
            (5.0, 2, 0.1, 0.0),
        ]);
        assert_eq!(
            concordance(&ds, &model2(), 10.0, EventLabel::new(1)).unwrap(),
            1.0
        );
    }

    #[test]
    fn joint_concordance_hand_instance() {
        // subject 3 is mispredicted as type 2: 5 comparable pairs, 4 jointly
        // concordant, all 4 correctly-typed pairs concordant
        let ds = scored_dataset(&[
            (1.0, 1, 0.9, 0.2),
            (2.0, 2, 0.1, 0.8),
            (3.0, 1, 0.05, 0.3),
        ]);
        let report = joint_concordance(&ds, &model2(), 10.0).unwrap();
        assert_eq!(report.joint_concordance, 0.8);
        assert_eq!(report.conditional_concordance, 1.0);
        assert_eq!(report.accuracy_star, 0.8);
        assert_eq!(report.pair_counts.joint.comparable, 5.0);
        assert_eq!(report.pair_counts.joint.concordant, 4.0);
        assert_eq!(report.pair_counts.joint.correct, 4.0);
    }

    #[test]
    fn accuracy_direct_count() {
        // 4 subjects by the horizon, 3 predicted correctly
        let ds = scored_dataset(&[
            (1.0, 1, 0.9, 0.1),
            (2.0, 2, 0.1, 0.9),
            (3.0, 1, 0.8, 0.2),
            (4.0, 2, 0.9, 0.1), // wrong: predicts 1
            (9.0, 1, 0.9, 0.1), // beyond horizon
        ]);
        assert_eq!(accuracy(&ds, &model2(), 5.0).unwrap(), 0.75);
    }

    #[test]
    fn oracle_predictor_has_unit_accuracy() {
        let ds = scored_dataset(&[
            (1.0, 1, 1.0, 0.0),
            (2.0, 2, 0.0, 1.0),
            (3.0, 1, 1.0, 0.0),
        ]);
        assert_eq!(accuracy(&ds, &model2(), 10.0).unwrap(), 1.0);
    }

    #[test]
    fn uncensored_estimators_reject_censored_data() {
        let ds = scored_dataset(&[
            (1.0, 1, 0.9, 0.1),
            (2.0, 0, 0.5, 0.5),
            (3.0, 2, 0.1, 0.9),
        ]);
        assert!(matches!(
            concordance(&ds, &model2(), 10.0, EventLabel::new(1)),
            Err(MetricsError::CensoredData)
        ));
        assert!(matches!(
            joint_concordance(&ds, &model2(), 10.0),
            Err(MetricsError::CensoredData)
        ));
    }

    #[test]
    fn empty_denominators_are_errors() {
        let ds = scored_dataset(&[(5.0, 1, 0.9, 0.1), (6.0, 2, 0.1, 0.9)]);
        // horizon before every observation
        assert!(matches!(
            concordance(&ds, &model2(), 1.0, EventLabel::new(1)),
            Err(MetricsError::NoComparablePairs { .. })
        ));
        assert!(matches!(
            accuracy(&ds, &model2(), 1.0),
            Err(MetricsError::NoSubjectsBeforeHorizon)
        ));
        assert!(matches!(
            joint_concordance(&ds, &model2(), 1.0),
            Err(MetricsError::NoComparablePairs { .. })
        ));
        assert!(matches!(
            concordance(&ds, &model2(), 10.0, EventLabel::new(3)),
            Err(MetricsError::UnknownEventType { .. })
        ));
    }

    #[test]
    fn weighted_hand_instance() {
        // censoring at t=2 gives G = 1 on [0,2), 2/3 afterwards; subject 3
        // is mispredicted, subject 2 censored
        let ds = scored_dataset(&[
            (1.0, 1, 0.9, 0.1),
            (2.0, 0, 0.3, 0.6),
            (3.0, 1, 0.1, 0.4),
            (4.0, 2, 0.2, 0.7),
        ]);
        let g = crate::censoring::fit_km_censoring(&ds).unwrap();
        assert!((g.survival_at(2.0) - 2.0 / 3.0).abs() < 1e-15);

        let report = weighted_joint_concordance(&ds, &model2(), &g, 10.0).unwrap();
        // hand-evaluated sums: numerator 3 + 0 + 3.75, denominator 3 + 2.25 + 3.75
        assert!((report.pair_counts.joint.concordant - 6.75).abs() < 1e-12);
        assert!((report.pair_counts.joint.comparable - 9.0).abs() < 1e-12);
        assert!((report.joint_concordance - 0.75).abs() < 1e-12);
        assert_eq!(report.conditional_concordance, 1.0);
        assert!((report.accuracy_star - 0.75).abs() < 1e-12);

        // per-event and accuracy hand values
        let c1 = weighted_concordance(&ds, &model2(), &g, 10.0, EventLabel::new(1)).unwrap();
        assert!((c1 - 3.0 / 5.25).abs() < 1e-12);
        let c2 = weighted_concordance(&ds, &model2(), &g, 10.0, EventLabel::new(2)).unwrap();
        assert_eq!(c2, 1.0);
        let a = weighted_accuracy(&ds, &model2(), &g, 10.0).unwrap();
        assert!((a - 0.625).abs() < 1e-12);
    }

    #[test]
    fn zero_censoring_weighted_equals_unweighted_exactly() {
        let ds = scored_dataset(&[
            (1.0, 1, 0.9, 0.2),
            (2.0, 2, 0.1, 0.8),
            (3.0, 1, 0.05, 0.3),
            (4.5, 2, 0.4, 0.45),
            (7.25, 1, 0.6, 0.1),
        ]);
        let g = crate::censoring::fit_km_censoring(&ds).unwrap();
        let plain = joint_concordance(&ds, &model2(), 10.0).unwrap();
        let weighted = weighted_joint_concordance(&ds, &model2(), &g, 10.0).unwrap();
        assert_eq!(plain, weighted);
    }

    #[test]
    fn zero_censoring_survival_is_an_error() {
        let ds = scored_dataset(&[
            (1.0, 1, 0.9, 0.1),
            (2.0, 1, 0.5, 0.2),
            (3.0, 2, 0.1, 0.9),
        ]);
        // externally supplied censoring model that dies before the data
        let g = crate::censoring::CensoringModel::from_jumps(vec![0.5], vec![0.0]);
        assert!(matches!(
            weighted_joint_concordance(&ds, &model2(), &g, 10.0),
            Err(MetricsError::ZeroCensoringSurvival { .. })
        ));
    }

    #[test]
    fn tie_rule_changes_constant_scores() {
        let ds = scored_dataset(&[
            (1.0, 1, 0.5, 0.5),
            (2.0, 2, 0.5, 0.5),
            (3.0, 1, 0.5, 0.5),
        ]);
        let strict = concordance(&ds, &model2(), 10.0, EventLabel::new(1)).unwrap();
        assert_eq!(strict, 0.0);
        let half = concordance_opts(
            &ds,
            &model2(),
            10.0,
            EventLabel::new(1),
            &MetricOptions {
                tie_rule: TieRule::HalfCredit,
            },
        )
        .unwrap();
        assert_eq!(half, 0.5);
    }

    #[test]
    fn single_event_type_joint_equals_concordance() {
        let rows = [
            (1.0, 1, 0.9, 0.0),
            (2.0, 1, 0.6, 0.0),
            (3.5, 1, 0.7, 0.0),
            (4.0, 1, 0.1, 0.0),
        ];
        let raws: Vec<RawRecord> = rows
            .iter()
            .enumerate()
            .map(|(i, &(time, event, r1, _))| RawRecord {
                id: format!("s{i}"),
                time,
                event,
                covariates: vec![r1],
            })
            .collect();
        let ds = validate_dataset(raws, vec!["risk1".into()]).unwrap();
        let m = CovariateRiskModel::new(1);
        let report = joint_concordance(&ds, &m, 10.0).unwrap();
        let c1 = concordance(&ds, &m, 10.0, EventLabel::new(1)).unwrap();
        assert_eq!(report.joint_concordance, c1);
        assert_eq!(report.accuracy_star, 1.0);
    }

    #[test]
    fn report_serializes_with_tallies() {
        let ds = scored_dataset(&[
            (1.0, 1, 0.9, 0.2),
            (2.0, 2, 0.1, 0.8),
            (3.0, 1, 0.05, 0.3),
        ]);
        let report = joint_concordance(&ds, &model2(), 10.0).unwrap();
        let json = report.to_json_pretty();
        let back: MetricReport = serde_json::from_str(&json).unwrap();
        assert_eq!(report, back);
        assert!(json.contains("pair_counts"));
        assert!(json.contains("accuracy_star"));
    }

    // ---- property tests ----------------------------------------------

    /// Rows with distinct times: (time, event, r1, r2) with quantized risks
    /// so risk ties occur often.
    fn distinct_time_rows() -> impl Strategy<Value = Vec<(f64, u32, f64, f64)>> {
        proptest::collection::vec((0u8..50, 1u32..3, 0u8..8, 0u8..8), 4..28).prop_map(|raw| {
            let mut rows: Vec<(f64, u32, f64, f64)> = raw
                .iter()
                .enumerate()
                .map(|(i, &(t, e, r1, r2))| {
                    (
                        t as f64 + i as f64 * 1e-4,
                        e,
                        r1 as f64 / 8.0,
                        r2 as f64 / 8.0,
                    )
                })
                .collect();
            rows[0].1 = 1;
            rows[1].1 = 2;
            rows
        })
    }

    /// Rows allowing tied times as well.
    fn tied_time_rows() -> impl Strategy<Value = Vec<(f64, u32, f64, f64)>> {
        proptest::collection::vec((0u8..12, 1u32..3, 0u8..8, 0u8..8), 4..28).prop_map(|raw| {
            let mut rows: Vec<(f64, u32, f64, f64)> = raw
                .iter()
                .map(|&(t, e, r1, r2)| (t as f64, e, r1 as f64 / 8.0, r2 as f64 / 8.0))
                .collect();
            rows[0].1 = 1;
            rows[1].1 = 2;
            rows
        })
    }

    proptest! {
        // the three joint ratios are exact functions of the shared tallies,
        // and the product identity holds to floating-point tolerance
        #[test]
        fn decomposition_identity(rows in tied_time_rows(), horizon in 1.0f64..14.0) {
            let ds = scored_dataset(&rows);
            if let Ok(report) = joint_concordance(&ds, &model2(), horizon) {
                let j = &report.pair_counts.joint;
                prop_assert_eq!(report.joint_concordance, j.concordant / j.comparable);
                prop_assert_eq!(report.accuracy_star, j.correct / j.comparable);
                if j.correct > 0.0 {
                    prop_assert_eq!(report.conditional_concordance, j.concordant / j.correct);
                }
                let product = report.conditional_concordance * report.accuracy_star;
                prop_assert!((report.joint_concordance - product).abs() < 1e-12);
                prop_assert!(report.joint_concordance <= report.accuracy_star + 1e-15);
            }
        }

        // weighted estimator with no censoring reproduces the uncensored
        // estimator exactly (distinct times)
        #[test]
        fn weighted_reduces_to_unweighted(rows in distinct_time_rows(), horizon in 1.0f64..60.0) {
            let ds = scored_dataset(&rows);
            let g = crate::censoring::fit_km_censoring(&ds).unwrap();
            let plain = joint_concordance(&ds, &model2(), horizon);
            let weighted = weighted_joint_concordance(&ds, &model2(), &g, horizon);
            match (plain, weighted) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "disagree: {:?} vs {:?}", a.is_ok(), b.is_ok()),
            }
        }

        // a common strictly increasing transform of all scores leaves every
        // concordance metric unchanged
        #[test]
        fn monotone_transform_invariance(rows in tied_time_rows(), horizon in 1.0f64..14.0) {
            let ds = scored_dataset(&rows);
            let transformed: Vec<(f64, u32, f64, f64)> = rows
                .iter()
                .map(|&(t, e, r1, r2)| (t, e, 0.5 * r1 + 0.25, 0.5 * r2 + 0.25))
                .collect();
            let ds_t = scored_dataset(&transformed);
            let a = joint_concordance(&ds, &model2(), horizon);
            let b = joint_concordance(&ds_t, &model2(), horizon);
            match (a, b) {
                (Ok(ra), Ok(rb)) => {
                    prop_assert_eq!(ra.joint_concordance, rb.joint_concordance);
                    prop_assert_eq!(ra.concordance_per_event, rb.concordance_per_event);
                    prop_assert_eq!(ra.accuracy, rb.accuracy);
                }
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "transform changed comparability"),
            }
        }

        // indicator invariants: precedence and competing-follow are mutually
        // exclusive, and precedence implies comparability
        #[test]
        fn pair_indicator_invariants(
            ti in 0.0f64..10.0, tj in 0.0f64..10.0,
            di in 1u32..3, dj in 0u32..3, d in 1u32..3,
            ri in 0.0f64..1.0, rj in 0.0f64..1.0, predicted in 1u32..3,
        ) {
            let p = PairIndicators::evaluate(
                ti, EventLabel::new(di), tj, EventLabel::new(dj), 5.0,
                EventLabel::new(d), ri, rj, EventLabel::new(predicted),
            );
            prop_assert!(!(p.precedes && p.follows_competing));
            if p.precedes {
                prop_assert!(p.comparable);
            }
        }
    }
}
