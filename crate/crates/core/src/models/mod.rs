//! Built-in risk models: the closed-form exponential two-risk model and a
//! cause-specific proportional-hazards regression with a Breslow baseline,
//! scoring subjects by their estimated cumulative incidence.

mod cause_specific;
mod exp;

pub use cause_specific::{
    csc_risk, fit_cause_specific, partial_log_likelihood, BaselineHazard, CauseSpecificPH,
    FitConfig, FitError,
};
pub use exp::{exp_model_risk, exp_model_type, ExpModel};
