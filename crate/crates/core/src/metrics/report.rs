//! Evaluation report types and their pair-count tallies.

use serde::{Deserialize, Serialize};

use crate::data::EventLabel;

/// Numerator/denominator pair behind a single ratio metric. For weighted
/// estimators these are weight sums; for the uncensored estimators they are
/// exact pair counts (integer-valued, plus halves under tie credit).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub numerator: f64,
    pub denominator: f64,
}

impl Tally {
    pub fn ratio(&self) -> f64 {
        self.numerator / self.denominator
    }
}

/// Tallies for the joint metric. The three ratios share these terms:
/// joint concordance = `concordant / comparable`, conditional concordance =
/// `concordant / correct`, accuracy* = `correct / comparable`, so the
/// decomposition identity holds by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointTally {
    /// Pairs (weight) that are comparable, correctly type-predicted, and
    /// risk-ordered.
    pub concordant: f64,
    /// Pairs (weight) that are comparable and correctly type-predicted.
    pub correct: f64,
    /// Pairs (weight) that are comparable.
    pub comparable: f64,
}

/// Raw tallies for every reported metric, included for auditability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCounts {
    pub concordance_per_event: Vec<Tally>,
    pub accuracy: Tally,
    pub joint: JointTally,
}

/// Percentile bootstrap interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub replicates_used: usize,
    pub replicates_skipped: usize,
}

/// Bootstrap intervals for each reported metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCis {
    pub concordance_per_event: Vec<ConfidenceInterval>,
    pub accuracy: ConfidenceInterval,
    pub joint_concordance: ConfidenceInterval,
    pub conditional_concordance: ConfidenceInterval,
    pub accuracy_star: ConfidenceInterval,
}

/// Full evaluation at one horizon: per-event concordance, type-prediction
/// accuracy, joint concordance and its two decomposition factors, the
/// underlying tallies, and optional bootstrap intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub horizon: f64,
    pub n_event_types: usize,
    pub concordance_per_event: Vec<f64>,
    pub accuracy: f64,
    pub joint_concordance: f64,
    pub conditional_concordance: f64,
    pub accuracy_star: f64,
    pub pair_counts: PairCounts,
    pub bootstrap_ci: Option<BootstrapCis>,
}

impl MetricReport {
    /// Concordance for one event type.
    pub fn concordance(&self, event: EventLabel) -> Option<f64> {
        self.concordance_per_event.get(event.index()?).copied()
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Selects a single metric out of a report, e.g. for bootstrap intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MetricSelector {
    Concordance(EventLabel),
    Accuracy,
    JointConcordance,
    ConditionalConcordance,
    AccuracyStar,
}

impl MetricSelector {
    pub fn extract(&self, report: &MetricReport) -> Option<f64> {
        match self {
            MetricSelector::Concordance(k) => report.concordance(*k),
            MetricSelector::Accuracy => Some(report.accuracy),
            MetricSelector::JointConcordance => Some(report.joint_concordance),
            MetricSelector::ConditionalConcordance => Some(report.conditional_concordance),
            MetricSelector::AccuracyStar => Some(report.accuracy_star),
        }
    }
}
