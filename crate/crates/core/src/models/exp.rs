//! The fixed exponential two-risk model: for a scalar covariate `x`, the
//! risk of event 1 is `exp(x)` and the risk of event 2 is `2 exp(-|x|)`,
//! independent of the horizon.

use crate::data::EventLabel;
use crate::risk::{ModelError, RiskModel};

#[derive(Debug, Clone, Copy, Default)]
pub struct ExpModel;

impl RiskModel for ExpModel {
    fn n_event_types(&self) -> usize {
        2
    }

    fn risk(&self, covariates: &[f64], _horizon: f64, event: EventLabel) -> f64 {
        let x = covariates[0];
        match event.code() {
            1 => x.exp(),
            2 => 2.0 * (-x.abs()).exp(),
            other => panic!("exponential model scores event types 1 and 2, got {other}"),
        }
    }

    fn check_compatible(&self, n_covariates: usize, n_event_types: usize) -> Result<(), ModelError> {
        if n_covariates != 1 {
            return Err(ModelError::DimensionMismatch {
                expected: 1,
                found: n_covariates,
            });
        }
        if n_event_types != 2 {
            return Err(ModelError::EventTypeMismatch {
                expected: 2,
                found: n_event_types,
            });
        }
        Ok(())
    }
}

/// Checked evaluation of the exponential model's risk score.
pub fn exp_model_risk(covariates: &[f64], horizon: f64, event: EventLabel) -> Result<f64, ModelError> {
    if covariates.len() != 1 {
        return Err(ModelError::DimensionMismatch {
            expected: 1,
            found: covariates.len(),
        });
    }
    if event.index().is_none() || event.code() > 2 {
        return Err(ModelError::EventTypeMismatch {
            expected: 2,
            found: event.code() as usize,
        });
    }
    Ok(ExpModel.risk(covariates, horizon, event))
}

/// Checked type prediction of the exponential model.
pub fn exp_model_type(covariates: &[f64], horizon: f64) -> Result<EventLabel, ModelError> {
    if covariates.len() != 1 {
        return Err(ModelError::DimensionMismatch {
            expected: 1,
            found: covariates.len(),
        });
    }
    Ok(ExpModel.predict_type(covariates, horizon))
}
