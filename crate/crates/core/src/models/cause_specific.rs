//! Cause-specific proportional-hazards regression.
//!
//! For each event type `k`, the partial likelihood is maximized treating
//! the other event types and censoring as censored (damped Newton steps,
//! Breslow tie handling), and the baseline cumulative hazard is estimated
//! with the Breslow formula. Risk scores are cumulative incidence values
//! obtained from the discrete product-integral over the observed event
//! times, combining all cause-specific hazards.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{Dataset, EventLabel};
use crate::numeric::solve_spd;
use crate::risk::{ModelError, RiskModel};

#[derive(Debug, Error)]
pub enum FitError {
    #[error("event type {event}: {found} events, need at least {required}")]
    InsufficientEvents {
        event: u32,
        required: usize,
        found: usize,
    },
    #[error(
        "event type {event}: no convergence in {max_iter} iterations (gradient max-norm {grad_norm:e})"
    )]
    NonConvergence {
        event: u32,
        max_iter: usize,
        grad_norm: f64,
    },
    #[error("event type {event}: coefficient path diverges; partial likelihood appears monotone")]
    MonotoneLikelihoodDivergence { event: u32 },
    #[error("event type {event}: observed information is singular")]
    SingularInformation { event: u32 },
    #[error("model deserialization failed: {0}")]
    Deserialize(String),
}

/// Newton iteration controls for the partial-likelihood fit.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FitConfig {
    pub max_iter: usize,
    /// Convergence threshold on the gradient max-norm.
    pub tol: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_iter: 100,
            tol: 1e-8,
        }
    }
}

/// Breslow estimate of a cumulative baseline hazard: increments at the
/// distinct event times of one cause, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineHazard {
    pub times: Vec<f64>,
    pub increments: Vec<f64>,
}

impl BaselineHazard {
    /// Cumulative hazard at `t`.
    pub fn cumulative_at(&self, t: f64) -> f64 {
        self.times
            .iter()
            .zip(&self.increments)
            .take_while(|(&s, _)| s <= t)
            .map(|(_, &dl)| dl)
            .sum()
    }
}

/// A fitted cause-specific proportional-hazards model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CauseSpecificPH {
    covariate_means: Vec<f64>,
    /// Per event type, one coefficient per covariate.
    coefficients: Vec<Vec<f64>>,
    /// Per event type, the Breslow baseline (relative to centered covariates).
    baselines: Vec<BaselineHazard>,
    /// Baselines merged onto one ascending time grid; derived, built lazily.
    #[serde(skip)]
    merged: std::sync::OnceLock<MergedTimeline>,
}

impl PartialEq for CauseSpecificPH {
    fn eq(&self, other: &Self) -> bool {
        self.covariate_means == other.covariate_means
            && self.coefficients == other.coefficients
            && self.baselines == other.baselines
    }
}

/// All causes' baseline increments on a shared ascending time grid
/// (`increments[row * k + cause]`, zero where a cause has no jump).
#[derive(Debug, Clone, Default)]
struct MergedTimeline {
    times: Vec<f64>,
    increments: Vec<f64>,
}

impl MergedTimeline {
    fn build(baselines: &[BaselineHazard]) -> Self {
        let k = baselines.len();
        let mut times: Vec<f64> = baselines.iter().flat_map(|h| h.times.iter().copied()).collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        let mut increments = vec![0.0f64; times.len() * k];
        for (c, h) in baselines.iter().enumerate() {
            for (&t, &dl) in h.times.iter().zip(&h.increments) {
                let row = times.partition_point(|&u| u < t);
                increments[row * k + c] = dl;
            }
        }
        MergedTimeline { times, increments }
    }
}

const MAX_ABS_COEFFICIENT: f64 = 50.0;

fn exp_clamped(x: f64) -> f64 {
    x.min(700.0).exp()
}

/// Fit a cause-specific model on every event type in the dataset.
pub fn fit_cause_specific(ds: &Dataset, config: &FitConfig) -> Result<CauseSpecificPH, FitError> {
    let n = ds.len();
    let d = ds.n_covariates();
    let k_types = ds.n_event_types();

    for code in 1..=k_types as u32 {
        let found = ds.records().iter().filter(|r| r.event.code() == code).count();
        if found < d + 1 {
            return Err(FitError::InsufficientEvents {
                event: code,
                required: d + 1,
                found,
            });
        }
    }

    let times: Vec<f64> = ds.records().iter().map(|r| r.time).collect();
    let codes: Vec<u32> = ds.records().iter().map(|r| r.event.code()).collect();

    let mut means = vec![0.0f64; d];
    for r in ds.records() {
        for (m, &x) in means.iter_mut().zip(&r.covariates) {
            *m += x;
        }
    }
    for m in &mut means {
        *m /= n as f64;
    }
    let mut x = vec![0.0f64; n * d];
    for (i, r) in ds.records().iter().enumerate() {
        for j in 0..d {
            x[i * d + j] = r.covariates[j] - means[j];
        }
    }

    // constant columns carry no signal; their coefficient is fixed at zero
    let active: Vec<usize> = (0..d)
        .filter(|&j| {
            let first = x[j];
            (1..n).any(|i| x[i * d + j] != first)
        })
        .collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| times[b].total_cmp(&times[a])); // descending

    let fitted: Result<Vec<(Vec<f64>, BaselineHazard)>, FitError> = (1..=k_types as u32)
        .into_par_iter()
        .map(|code| {
            let beta = newton_fit(&order, &times, &codes, &x, d, &active, code, config)?;
            let baseline = breslow_baseline(&order, &times, &codes, &x, d, code, &beta);
            Ok((beta, baseline))
        })
        .collect();
    let fitted = fitted?;

    let model = CauseSpecificPH {
        covariate_means: means,
        coefficients: fitted.iter().map(|(b, _)| b.clone()).collect(),
        baselines: fitted.into_iter().map(|(_, h)| h).collect(),
        merged: std::sync::OnceLock::new(),
    };

    // numeric spot check of the sub-distribution bound on training points
    let horizon = times.iter().cloned().fold(0.0f64, f64::max);
    let stride = (n / 200).max(1);
    for r in ds.records().iter().step_by(stride) {
        let total: f64 = model.risks_at(&r.covariates, horizon).iter().sum();
        debug_assert!(total <= 1.0 + 1e-9, "cumulative incidence sum {total} > 1");
    }

    Ok(model)
}

/// Log partial likelihood and gradient for one event type at `beta`,
/// computed on the raw (uncentered) covariates with Breslow tie handling.
/// Exposed for diagnostics and finite-difference checks.
pub fn partial_log_likelihood(
    ds: &Dataset,
    event: EventLabel,
    beta: &[f64],
) -> (f64, Vec<f64>) {
    let n = ds.len();
    let d = ds.n_covariates();
    assert_eq!(beta.len(), d);
    let times: Vec<f64> = ds.records().iter().map(|r| r.time).collect();
    let codes: Vec<u32> = ds.records().iter().map(|r| r.event.code()).collect();
    let mut x = vec![0.0f64; n * d];
    for (i, r) in ds.records().iter().enumerate() {
        x[i * d..(i + 1) * d].copy_from_slice(&r.covariates);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| times[b].total_cmp(&times[a]));
    let active: Vec<usize> = (0..d).collect();
    let sums = sweep(&order, &times, &codes, &x, d, &active, event.code(), beta, false);
    (sums.loglik, sums.gradient)
}

struct SweepSums {
    loglik: f64,
    gradient: Vec<f64>,
    /// Negative Hessian (observed information), row-major over active columns.
    information: Vec<f64>,
}

/// One pass over subjects in descending time order, accumulating the risk
/// set sums and, at each event of the target type, the likelihood terms.
#[allow(clippy::too_many_arguments)]
fn sweep(
    order_desc: &[usize],
    times: &[f64],
    codes: &[u32],
    x: &[f64],
    d: usize,
    active: &[usize],
    event_code: u32,
    beta_active: &[f64],
    want_information: bool,
) -> SweepSums {
    let p = active.len();
    let mut s0 = 0.0f64;
    let mut s1 = vec![0.0f64; p];
    let mut s2 = vec![0.0f64; p * p];
    let mut loglik = 0.0f64;
    let mut gradient = vec![0.0f64; p];
    let mut information = vec![0.0f64; p * p];

    let n = order_desc.len();
    let mut pos = 0usize;
    while pos < n {
        let t = times[order_desc[pos]];
        let mut end = pos;
        // everyone tied at t enters the risk set before its events score
        while end < n && times[order_desc[end]] == t {
            let idx = order_desc[end];
            let xi = &x[idx * d..(idx + 1) * d];
            let mut xb = 0.0;
            for (a, &col) in active.iter().enumerate() {
                xb += xi[col] * beta_active[a];
            }
            let w = exp_clamped(xb);
            s0 += w;
            for (a, &col) in active.iter().enumerate() {
                s1[a] += w * xi[col];
            }
            if want_information {
                for (a, &ca) in active.iter().enumerate() {
                    for (b, &cb) in active.iter().enumerate() {
                        s2[a * p + b] += w * xi[ca] * xi[cb];
                    }
                }
            }
            end += 1;
        }
        for &idx in &order_desc[pos..end] {
            if codes[idx] != event_code {
                continue;
            }
            let xi = &x[idx * d..(idx + 1) * d];
            let mut xb = 0.0;
            for (a, &col) in active.iter().enumerate() {
                xb += xi[col] * beta_active[a];
            }
            loglik += xb - s0.ln();
            let inv_s0 = 1.0 / s0;
            for (a, &col) in active.iter().enumerate() {
                gradient[a] += xi[col] - s1[a] * inv_s0;
            }
            if want_information {
                for a in 0..p {
                    for b in 0..p {
                        information[a * p + b] +=
                            s2[a * p + b] * inv_s0 - s1[a] * s1[b] * inv_s0 * inv_s0;
                    }
                }
            }
        }
        pos = end;
    }
    SweepSums {
        loglik,
        gradient,
        information,
    }
}

#[allow(clippy::too_many_arguments)]
fn newton_fit(
    order_desc: &[usize],
    times: &[f64],
    codes: &[u32],
    x: &[f64],
    d: usize,
    active: &[usize],
    event_code: u32,
    config: &FitConfig,
) -> Result<Vec<f64>, FitError> {
    let p = active.len();
    let mut beta = vec![0.0f64; p];
    if p == 0 {
        return Ok(vec![0.0; d]);
    }
    let expand = |beta: &[f64]| -> Result<Vec<f64>, FitError> {
        if beta.iter().any(|b| b.abs() > MAX_ABS_COEFFICIENT) {
            return Err(FitError::MonotoneLikelihoodDivergence { event: event_code });
        }
        let mut full = vec![0.0f64; d];
        for (a, &col) in active.iter().enumerate() {
            full[col] = beta[a];
        }
        Ok(full)
    };
    let mut sums = sweep(order_desc, times, codes, x, d, active, event_code, &beta, true);
    for _ in 0..config.max_iter {
        let grad_norm = sums.gradient.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if grad_norm < config.tol {
            return expand(&beta);
        }
        let delta = solve_spd(&sums.information, &sums.gradient, p)
            .ok_or(FitError::SingularInformation { event: event_code })?;
        if delta.iter().any(|v| !v.is_finite()) {
            return Err(FitError::SingularInformation { event: event_code });
        }

        // damped step: halve until the log partial likelihood improves.
        // Near the optimum the true improvement shrinks below the
        // floating-point resolution of the log likelihood, so an apparent
        // decrease within that noise floor is accepted as flat.
        let noise_floor = 1e-11 * (1.0 + sums.loglik.abs());
        let mut step = 1.0f64;
        let mut accepted = None;
        for _ in 0..30 {
            let trial: Vec<f64> = beta
                .iter()
                .zip(&delta)
                .map(|(b, dl)| b + step * dl)
                .collect();
            let trial_sums =
                sweep(order_desc, times, codes, x, d, active, event_code, &trial, true);
            if trial_sums.loglik > sums.loglik - noise_floor {
                accepted = Some((trial, trial_sums));
                break;
            }
            step *= 0.5;
        }
        let Some((next_beta, next_sums)) = accepted else {
            // no uphill step exists numerically; report the stall
            return Err(FitError::NonConvergence {
                event: event_code,
                max_iter: config.max_iter,
                grad_norm,
            });
        };
        beta = next_beta;
        sums = next_sums;
        if beta.iter().any(|b| b.abs() > MAX_ABS_COEFFICIENT) {
            return Err(FitError::MonotoneLikelihoodDivergence { event: event_code });
        }
    }
    let grad_norm = sums.gradient.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    if grad_norm < config.tol {
        return expand(&beta);
    }
    Err(FitError::NonConvergence {
        event: event_code,
        max_iter: config.max_iter,
        grad_norm,
    })
}

/// Breslow baseline hazard increments `d_k(s) / sum_{j at risk} exp(x_j b)`
/// at the distinct event times of the target type, ascending.
fn breslow_baseline(
    order_desc: &[usize],
    times: &[f64],
    codes: &[u32],
    x: &[f64],
    d: usize,
    event_code: u32,
    beta: &[f64],
) -> BaselineHazard {
    let n = order_desc.len();
    let mut s0 = 0.0f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut pos = 0usize;
    while pos < n {
        let t = times[order_desc[pos]];
        let mut end = pos;
        let mut events_here = 0usize;
        while end < n && times[order_desc[end]] == t {
            let idx = order_desc[end];
            let xi = &x[idx * d..(idx + 1) * d];
            let mut xb = 0.0;
            for (&b, &v) in beta.iter().zip(xi) {
                xb += v * b;
            }
            s0 += exp_clamped(xb);
            if codes[idx] == event_code {
                events_here += 1;
            }
            end += 1;
        }
        if events_here > 0 {
            out.push((t, events_here as f64 / s0));
        }
        pos = end;
    }
    out.reverse();
    BaselineHazard {
        times: out.iter().map(|&(t, _)| t).collect(),
        increments: out.iter().map(|&(_, dl)| dl).collect(),
    }
}

impl CauseSpecificPH {
    pub fn coefficients(&self, event: EventLabel) -> &[f64] {
        &self.coefficients[event.index().expect("observed event type")]
    }

    pub fn baseline(&self, event: EventLabel) -> &BaselineHazard {
        &self.baselines[event.index().expect("observed event type")]
    }

    pub fn covariate_means(&self) -> &[f64] {
        &self.covariate_means
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, FitError> {
        let model: CauseSpecificPH =
            serde_json::from_str(text).map_err(|e| FitError::Deserialize(e.to_string()))?;
        if model.coefficients.len() != model.baselines.len() || model.coefficients.is_empty() {
            return Err(FitError::Deserialize(
                "coefficient and baseline blocks disagree".to_string(),
            ));
        }
        Ok(model)
    }

    /// Per-cause hazard multipliers `exp(b_k (x - mean))`.
    fn relative_hazards(&self, covariates: &[f64]) -> Vec<f64> {
        self.coefficients
            .iter()
            .map(|beta| {
                let mut xb = 0.0;
                for ((b, x), m) in beta.iter().zip(covariates).zip(&self.covariate_means) {
                    xb += b * (x - m);
                }
                exp_clamped(xb)
            })
            .collect()
    }

    fn merged(&self) -> &MergedTimeline {
        self.merged.get_or_init(|| MergedTimeline::build(&self.baselines))
    }

    /// Walk the merged event-time grid once, accumulating every cause's
    /// cumulative incidence by the product-integral. Increments are capped
    /// so the survival mass never goes negative, which also keeps the
    /// incidence sum at or below one.
    fn cumulative_incidence_all(&self, covariates: &[f64], t: f64) -> Vec<f64> {
        let k = self.coefficients.len();
        let rel = self.relative_hazards(covariates);
        let grid = self.merged();
        let mut incidence = vec![0.0f64; k];
        let mut surv = 1.0f64;
        for (row, &s) in grid.times.iter().enumerate() {
            if s > t || surv <= 0.0 {
                break;
            }
            let steps = &grid.increments[row * k..(row + 1) * k];
            let mut total = 0.0f64;
            for (r, dl) in rel.iter().zip(steps) {
                total += r * dl;
            }
            let scale = if total > 1.0 { surv / total } else { surv };
            for ((f, r), dl) in incidence.iter_mut().zip(&rel).zip(steps) {
                *f += r * dl * scale;
            }
            surv *= (1.0 - total).max(0.0);
        }
        incidence
    }
}

impl RiskModel for CauseSpecificPH {
    fn n_event_types(&self) -> usize {
        self.coefficients.len()
    }

    fn risk(&self, covariates: &[f64], horizon: f64, event: EventLabel) -> f64 {
        self.cumulative_incidence_all(covariates, horizon)
            [event.index().expect("observed event type")]
    }

    fn risks_at(&self, covariates: &[f64], horizon: f64) -> Vec<f64> {
        self.cumulative_incidence_all(covariates, horizon)
    }

    fn check_compatible(&self, n_covariates: usize, n_event_types: usize) -> Result<(), ModelError> {
        if n_covariates != self.covariate_means.len() {
            return Err(ModelError::DimensionMismatch {
                expected: self.covariate_means.len(),
                found: n_covariates,
            });
        }
        if n_event_types != self.n_event_types() {
            return Err(ModelError::EventTypeMismatch {
                expected: self.n_event_types(),
                found: n_event_types,
            });
        }
        Ok(())
    }
}

/// Estimated cumulative incidence of `event` by time `t` for covariates `x`.
pub fn csc_risk(model: &CauseSpecificPH, covariates: &[f64], t: f64, event: EventLabel) -> f64 {
    model.risk(covariates, t, event)
}
