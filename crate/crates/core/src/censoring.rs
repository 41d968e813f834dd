//! Censoring-survival estimation: the Kaplan-Meier product-limit estimator
//! with the event/censoring roles reversed, so that `G(t) = Pr(C > t)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;

#[derive(Debug, Error)]
pub enum CensoringError {
    #[error("cannot fit a censoring model on an empty dataset")]
    EmptyDataset,
}

/// Estimated censoring survival `G(t) = Pr(C > t)` as a right-continuous
/// step function with `G(0) = 1`.
///
/// `jump_times` are the distinct times at which censoring occurs, ascending;
/// `survival_values[i]` is the value of `G` immediately after (and at)
/// `jump_times[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensoringModel {
    jump_times: Vec<f64>,
    survival_values: Vec<f64>,
}

/// Fit the reverse Kaplan-Meier estimator of the censoring distribution.
///
/// At each distinct time `t` with `c` censoring events and `r` subjects at
/// risk (observed time `>= t`), the running product is multiplied by
/// `1 - c / r`. Tie convention (fixed): subjects whose event occurs at `t`
/// are counted in the risk set for censorings at `t`.
pub fn fit_km_censoring(ds: &Dataset) -> Result<CensoringModel, CensoringError> {
    fit_km_censoring_records(ds.records().iter().map(|r| (r.time, r.event.is_censored())))
}

pub(crate) fn fit_km_censoring_records(
    records: impl Iterator<Item = (f64, bool)>,
) -> Result<CensoringModel, CensoringError> {
    let mut obs: Vec<(f64, bool)> = records.collect();
    if obs.is_empty() {
        return Err(CensoringError::EmptyDataset);
    }
    obs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let n = obs.len();
    let mut jump_times = Vec::new();
    let mut survival_values = Vec::new();
    let mut surv = 1.0f64;
    let mut i = 0usize;
    while i < n {
        let t = obs[i].0;
        let at_risk = n - i;
        let mut censored_here = 0usize;
        let mut j = i;
        while j < n && obs[j].0 == t {
            if obs[j].1 {
                censored_here += 1;
            }
            j += 1;
        }
        if censored_here > 0 {
            surv *= 1.0 - censored_here as f64 / at_risk as f64;
            jump_times.push(t);
            survival_values.push(surv);
        }
        i = j;
    }
    Ok(CensoringModel {
        jump_times,
        survival_values,
    })
}

impl CensoringModel {
    /// A model with no censoring mass: `G(t) = 1` everywhere.
    pub fn no_censoring() -> Self {
        CensoringModel {
            jump_times: Vec::new(),
            survival_values: Vec::new(),
        }
    }

    /// Build directly from jumps. Values must be non-increasing in `[0, 1]`
    /// and times strictly ascending; intended for tests and hand-built
    /// scenarios.
    pub fn from_jumps(jump_times: Vec<f64>, survival_values: Vec<f64>) -> Self {
        assert_eq!(jump_times.len(), survival_values.len());
        assert!(jump_times.windows(2).all(|w| w[0] < w[1]));
        assert!(survival_values.windows(2).all(|w| w[0] >= w[1]));
        assert!(survival_values.iter().all(|&v| (0.0..=1.0).contains(&v)));
        CensoringModel {
            jump_times,
            survival_values,
        }
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn survival_values(&self) -> &[f64] {
        &self.survival_values
    }

    /// `G(t)`: right-continuous step-function evaluation.
    pub fn survival_at(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        // number of jump times <= t
        let idx = self.jump_times.partition_point(|&jt| jt <= t);
        if idx == 0 {
            1.0
        } else {
            self.survival_values[idx - 1]
        }
    }

    /// Left limit `G(t-)`: the value just before `t`.
    pub fn survival_before(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        // number of jump times strictly below t
        let idx = self.jump_times.partition_point(|&jt| jt < t);
        if idx == 0 {
            1.0
        } else {
            self.survival_values[idx - 1]
        }
    }
}
