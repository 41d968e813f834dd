//! The risk-model abstraction: anything that scores a subject's risk of a
//! given event type by a given horizon.

use thiserror::Error;

use crate::data::EventLabel;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model expects {expected} covariate(s), dataset has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("model supports {expected} event type(s), dataset has {found}")]
    EventTypeMismatch { expected: usize, found: usize },
}

/// A fitted or closed-form risk model.
///
/// `risk` must be deterministic in its arguments and safe to call
/// concurrently. Higher scores mean higher predicted risk of that event
/// type by the horizon.
pub trait RiskModel: Sync {
    /// Number of competing event types the model scores (codes `1..=K`).
    fn n_event_types(&self) -> usize;

    /// Predicted risk of `event` occurring by `horizon` for a subject with
    /// the given covariates.
    fn risk(&self, covariates: &[f64], horizon: f64, event: EventLabel) -> f64;

    /// All event-type scores at once, indexed by `code - 1`. Models whose
    /// per-event scores share work should override this.
    fn risks_at(&self, covariates: &[f64], horizon: f64) -> Vec<f64> {
        (1..=self.n_event_types() as u32)
            .map(|code| self.risk(covariates, horizon, EventLabel::new(code)))
            .collect()
    }

    /// Type prediction given the score vector from [`RiskModel::risks_at`]:
    /// the argmax, ties broken toward the smallest event code.
    fn predict_type_from_scores(&self, scores: &[f64]) -> EventLabel {
        let mut best = 0usize;
        for (idx, &s) in scores.iter().enumerate().skip(1) {
            if s > scores[best] {
                best = idx;
            }
        }
        EventLabel::new(best as u32 + 1)
    }

    /// Predicted event type: the argmax of `risk` over the event types,
    /// ties broken toward the smallest event code.
    fn predict_type(&self, covariates: &[f64], horizon: f64) -> EventLabel {
        let scores = self.risks_at(covariates, horizon);
        self.predict_type_from_scores(&scores)
    }

    /// Cheap compatibility check run once before bulk evaluation.
    fn check_compatible(&self, n_covariates: usize, n_event_types: usize) -> Result<(), ModelError> {
        let _ = n_covariates;
        if n_event_types != self.n_event_types() {
            return Err(ModelError::EventTypeMismatch {
                expected: self.n_event_types(),
                found: n_event_types,
            });
        }
        Ok(())
    }
}

impl<M: RiskModel + ?Sized> RiskModel for &M {
    fn n_event_types(&self) -> usize {
        (**self).n_event_types()
    }
    fn risk(&self, covariates: &[f64], horizon: f64, event: EventLabel) -> f64 {
        (**self).risk(covariates, horizon, event)
    }
    fn risks_at(&self, covariates: &[f64], horizon: f64) -> Vec<f64> {
        (**self).risks_at(covariates, horizon)
    }
    fn predict_type_from_scores(&self, scores: &[f64]) -> EventLabel {
        (**self).predict_type_from_scores(scores)
    }
    fn predict_type(&self, covariates: &[f64], horizon: f64) -> EventLabel {
        (**self).predict_type(covariates, horizon)
    }
    fn check_compatible(&self, n_covariates: usize, n_event_types: usize) -> Result<(), ModelError> {
        (**self).check_compatible(n_covariates, n_event_types)
    }
}

/// Reads risk scores straight out of the covariate vector: the score for
/// event `k` is covariate column `k - 1`.
///
/// Useful when scores were produced elsewhere and stored alongside the
/// outcomes, and for driving the metrics with hand-constructed scores.
#[derive(Debug, Clone, Copy)]
pub struct CovariateRiskModel {
    n_event_types: usize,
}

impl CovariateRiskModel {
    pub fn new(n_event_types: usize) -> Self {
        assert!(n_event_types >= 1);
        CovariateRiskModel { n_event_types }
    }
}

impl RiskModel for CovariateRiskModel {
    fn n_event_types(&self) -> usize {
        self.n_event_types
    }

    fn risk(&self, covariates: &[f64], _horizon: f64, event: EventLabel) -> f64 {
        covariates[event.index().expect("censoring label has no risk score")]
    }

    fn check_compatible(&self, n_covariates: usize, n_event_types: usize) -> Result<(), ModelError> {
        if n_covariates < self.n_event_types {
            return Err(ModelError::DimensionMismatch {
                expected: self.n_event_types,
                found: n_covariates,
            });
        }
        if n_event_types != self.n_event_types {
            return Err(ModelError::EventTypeMismatch {
                expected: self.n_event_types,
                found: n_event_types,
            });
        }
        Ok(())
    }
}
