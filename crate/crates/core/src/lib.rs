//! Evaluation toolkit for competing-risks survival models.
//!
//! Competing-risks models are usually judged by per-event concordance and
//! by type-prediction accuracy. Neither measures whether a model gets the
//! event type *and* the risk ordering right for the same subject. The
//! joint concordance does: it is the probability that, for a comparable
//! pair of subjects, the model predicts the first subject's event type
//! correctly and ranks that subject's risk above the partner's.
//!
//! The crate provides:
//!
//! - validated survival datasets with a CSV interchange format ([`data`]),
//! - reverse Kaplan-Meier censoring-survival estimation ([`censoring`]),
//! - the uncensored and censoring-adjusted (inverse-probability weighted)
//!   estimators of concordance, accuracy, and joint concordance, with
//!   decomposition, tallies, and bootstrap intervals ([`metrics`]),
//! - built-in risk models: a closed-form exponential model and
//!   cause-specific proportional-hazards regression ([`models`]),
//! - a calibrated synthetic data generator with two independent
//!   ground-truth oracles ([`synth`]),
//! - variable-importance ranking by backward elimination ([`varimp`]),
//! - replicate study drivers behind the command-line harness ([`study`]).

pub mod censoring;
pub mod data;
pub mod metrics;
pub mod models;
pub mod numeric;
pub mod risk;
pub mod study;
pub mod synth;
pub mod varimp;

pub use censoring::{fit_km_censoring, CensoringError, CensoringModel};
pub use data::{
    evaluation_horizon, validate_dataset, DataError, Dataset, EventLabel, RawRecord,
    SurvivalRecord,
};
pub use metrics::{MetricOptions, MetricReport, MetricsError, TieRule};
pub use risk::{CovariateRiskModel, ModelError, RiskModel};
