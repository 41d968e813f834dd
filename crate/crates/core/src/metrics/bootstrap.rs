//! Percentile bootstrap over resampled subjects. The censoring model is
//! refit on every resample; the risk model is held fixed.
//!
//! Replicate `r` draws from an independent, seeded random stream, so
//! intervals are deterministic in `(seed, replicates)` and independent of
//! thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::censoring::{fit_km_censoring, CensoringModel};
use crate::data::Dataset;
use crate::numeric::quantile_type7;
use crate::risk::RiskModel;

use super::report::{BootstrapCis, ConfidenceInterval, MetricSelector};
use super::{weighted_joint_concordance, MetricsError};

fn validate(replicates: usize, level: f64) -> Result<(), MetricsError> {
    if replicates < 100 {
        return Err(MetricsError::InvalidBootstrap(format!(
            "need at least 100 replicates, got {replicates}"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(MetricsError::InvalidBootstrap(format!(
            "level {level} outside (0, 1)"
        )));
    }
    Ok(())
}

/// Run `extract` on every resample. Resamples on which the metric has no
/// comparable pairs are skipped and counted.
fn resample_estimates<F>(
    ds: &Dataset,
    replicates: usize,
    seed: u64,
    extract: F,
) -> Result<(Vec<Vec<f64>>, usize), MetricsError>
where
    F: Fn(&Dataset, &CensoringModel) -> Result<Vec<f64>, MetricsError> + Sync,
{
    let n = ds.len();
    let per_replicate: Result<Vec<Option<Vec<f64>>>, MetricsError> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(r as u64 + 1);
            let records = (0..n)
                .map(|_| ds.records()[rng.random_range(0..n)].clone())
                .collect();
            let resample = Dataset::from_parts_unchecked(
                records,
                ds.covariate_names().to_vec(),
                ds.n_event_types(),
            );
            let g = fit_km_censoring(&resample).expect("resample is nonempty");
            match extract(&resample, &g) {
                Ok(values) => Ok(Some(values)),
                Err(MetricsError::NoComparablePairs { .. })
                | Err(MetricsError::NoSubjectsBeforeHorizon) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let per_replicate = per_replicate?;
    let skipped = per_replicate.iter().filter(|v| v.is_none()).count();
    let used: Vec<Vec<f64>> = per_replicate.into_iter().flatten().collect();
    if used.is_empty() {
        return Err(MetricsError::InvalidBootstrap(
            "every resample was skipped (no comparable pairs)".to_string(),
        ));
    }
    Ok((used, skipped))
}

fn percentile_interval(
    mut values: Vec<f64>,
    level: f64,
    skipped: usize,
) -> ConfidenceInterval {
    values.sort_by(f64::total_cmp);
    let alpha = 1.0 - level;
    let used = values.len();
    ConfidenceInterval {
        lower: quantile_type7(&values, (alpha / 2.0).max(f64::MIN_POSITIVE)),
        upper: quantile_type7(&values, 1.0 - alpha / 2.0),
        level,
        replicates_used: used,
        replicates_skipped: skipped,
    }
}

/// Percentile bootstrap interval for one metric.
pub fn bootstrap_ci<M: RiskModel + ?Sized>(
    ds: &Dataset,
    model: &M,
    horizon: f64,
    selector: MetricSelector,
    replicates: usize,
    level: f64,
    seed: u64,
) -> Result<ConfidenceInterval, MetricsError> {
    validate(replicates, level)?;
    let (estimates, skipped) = resample_estimates(ds, replicates, seed, |resample, g| {
        let value = match selector {
            MetricSelector::Concordance(k) => {
                super::weighted_concordance(resample, model, g, horizon, k)?
            }
            MetricSelector::Accuracy => super::weighted_accuracy(resample, model, g, horizon)?,
            _ => {
                let report = weighted_joint_concordance(resample, model, g, horizon)?;
                selector.extract(&report).expect("selector is total here")
            }
        };
        Ok(vec![value])
    })?;
    let values = estimates.into_iter().map(|v| v[0]).collect();
    Ok(percentile_interval(values, level, skipped))
}

/// Bootstrap intervals for every metric in the report, sharing one set of
/// resamples.
pub fn bootstrap_cis_all<M: RiskModel + ?Sized>(
    ds: &Dataset,
    model: &M,
    horizon: f64,
    replicates: usize,
    level: f64,
    seed: u64,
) -> Result<BootstrapCis, MetricsError> {
    validate(replicates, level)?;
    let k = ds.n_event_types();
    let (estimates, skipped) = resample_estimates(ds, replicates, seed, |resample, g| {
        let report = weighted_joint_concordance(resample, model, g, horizon)?;
        let mut row = report.concordance_per_event.clone();
        row.push(report.accuracy);
        row.push(report.joint_concordance);
        row.push(report.conditional_concordance);
        row.push(report.accuracy_star);
        Ok(row)
    })?;
    let column = |idx: usize| -> ConfidenceInterval {
        percentile_interval(estimates.iter().map(|row| row[idx]).collect(), level, skipped)
    };
    Ok(BootstrapCis {
        concordance_per_event: (0..k).map(column).collect(),
        accuracy: column(k),
        joint_concordance: column(k + 1),
        conditional_concordance: column(k + 2),
        accuracy_star: column(k + 3),
    })
}
