//! The censoring-adjusted pair scan behind the weighted estimators.
//!
//! Ordered pairs are weighted by inverse censoring-survival probabilities:
//! a pair contributes through the earlier-observed channel with weight
//! `1 / (G(T_i-) G(T_i))` or, when the partner experienced a different
//! observed event first, with weight `1 / (G(T_i-) G(T_j))`. Only observed
//! events can anchor a pair; partners censored before `T_i` carry no
//! information about the ordering of interest and are excluded.
//!
//! The scan is O(n^2) per event type. Work is partitioned per anchor
//! subject `i`; each partition is summed sequentially and partitions are
//! merged in index order, so results are bit-reproducible regardless of the
//! number of worker threads.

use rayon::prelude::*;

use crate::censoring::CensoringModel;
use crate::data::EventLabel;

use super::counting::EventTallies;
use super::MetricsError;

/// The per-pair indicator block used by the weighted estimator, evaluated
/// for an ordered pair (i, j) and a target event type `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairIndicators {
    /// `i` was observed strictly before `j`.
    pub precedes: bool,
    /// `i` was observed strictly after `j`, and `j`'s observed event is a
    /// different (non-censoring) event type than `d`.
    pub follows_competing: bool,
    /// `i` is an observed event of type `d` no later than the horizon.
    pub counted_at_horizon: bool,
    /// `i` precedes `j` or `j`'s label differs from `d`. Defined for
    /// completeness; the weighted sums do not use it.
    pub comparable: bool,
    /// The model ranks `i` strictly above `j` for event `d` and predicts
    /// type `d` for `i`.
    pub risk_ordered_and_typed: bool,
}

impl PairIndicators {
    #[allow(clippy::too_many_arguments)]
    pub fn evaluate(
        time_i: f64,
        event_i: EventLabel,
        time_j: f64,
        event_j: EventLabel,
        horizon: f64,
        d: EventLabel,
        risk_i: f64,
        risk_j: f64,
        predicted_i: EventLabel,
    ) -> Self {
        PairIndicators {
            precedes: time_i < time_j,
            follows_competing: time_i > time_j && !event_j.is_censored() && event_j != d,
            counted_at_horizon: time_i <= horizon && event_i == d,
            comparable: time_i < time_j || event_j != d,
            risk_ordered_and_typed: risk_i > risk_j && predicted_i == d,
        }
    }
}

/// Per-subject censoring weights evaluated once up front.
pub(crate) struct CensoringWeights {
    /// `G(T_i-)`.
    pub before: Vec<f64>,
    /// `G(T_i)`.
    pub at: Vec<f64>,
}

impl CensoringWeights {
    pub(crate) fn evaluate(times: &[f64], g: &CensoringModel) -> Self {
        CensoringWeights {
            before: times.iter().map(|&t| g.survival_before(t)).collect(),
            at: times.iter().map(|&t| g.survival_at(t)).collect(),
        }
    }
}

/// Weighted pair tallies for every event type (or a single one).
///
/// `risks` is the row-major `n x K` score matrix, `predicted` the predicted
/// type codes. Returns per-event tallies indexed by `d - 1`; events outside
/// `only_event` (when set) are left at zero.
#[allow(clippy::too_many_arguments)]
pub(crate) fn weighted_event_tallies(
    times: &[f64],
    event_codes: &[u32],
    risks: &[f64],
    predicted: &[u32],
    weights: &CensoringWeights,
    horizon: f64,
    n_event_types: usize,
    tie_credit: f64,
    only_event: Option<u32>,
) -> Result<Vec<EventTallies>, MetricsError> {
    let n = times.len();
    let per_subject: Result<Vec<Option<(usize, EventTallies)>>, MetricsError> = (0..n)
        .into_par_iter()
        .map(|i| {
            let d = event_codes[i];
            if d == 0 || times[i] > horizon {
                return Ok(None);
            }
            if let Some(k) = only_event {
                if d != k {
                    return Ok(None);
                }
            }
            let g_before_i = weights.before[i];
            let col = (d - 1) as usize;
            let risk_i = risks[i * n_event_types + col];
            let correct = predicted[i] == d;
            let mut t = EventTallies::default();
            for j in 0..n {
                if j == i {
                    continue;
                }
                let w = if times[i] < times[j] {
                    let g_at_i = weights.at[i];
                    if g_before_i <= 0.0 || g_at_i <= 0.0 {
                        return Err(MetricsError::ZeroCensoringSurvival { time: times[i] });
                    }
                    1.0 / (g_before_i * g_at_i)
                } else if times[i] > times[j] && event_codes[j] != 0 && event_codes[j] != d {
                    let g_at_j = weights.at[j];
                    if g_before_i <= 0.0 || g_at_j <= 0.0 {
                        return Err(MetricsError::ZeroCensoringSurvival { time: times[j] });
                    }
                    1.0 / (g_before_i * g_at_j)
                } else {
                    continue;
                };
                let risk_j = risks[j * n_event_types + col];
                let q = if risk_i > risk_j {
                    1.0
                } else if risk_i == risk_j {
                    tie_credit
                } else {
                    0.0
                };
                t.den_all += w;
                t.num_all += w * q;
                if correct {
                    t.den_correct += w;
                    t.num_correct += w * q;
                }
            }
            Ok(Some((col, t)))
        })
        .collect();

    let mut out = vec![EventTallies::default(); n_event_types];
    for item in per_subject?.into_iter().flatten() {
        out[item.0].add(&item.1);
    }
    Ok(out)
}

/// Weighted accuracy tallies: observed events no later than the horizon,
/// weighted by `1 / G(T_i-)`; the numerator keeps the correctly
/// type-predicted ones.
pub(crate) fn weighted_accuracy_tallies(
    times: &[f64],
    event_codes: &[u32],
    predicted: &[u32],
    weights: &CensoringWeights,
    horizon: f64,
) -> Result<(f64, f64), MetricsError> {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..times.len() {
        if event_codes[i] == 0 || times[i] > horizon {
            continue;
        }
        let g_before_i = weights.before[i];
        if g_before_i <= 0.0 {
            return Err(MetricsError::ZeroCensoringSurvival { time: times[i] });
        }
        let w = 1.0 / g_before_i;
        den += w;
        if predicted[i] == event_codes[i] {
            num += w;
        }
    }
    Ok((num, den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indicator_basics() {
        let d = EventLabel::new(1);
        let p = PairIndicators::evaluate(
            1.0,
            EventLabel::new(1),
            2.0,
            EventLabel::new(2),
            10.0,
            d,
            0.9,
            0.1,
            EventLabel::new(1),
        );
        assert!(p.precedes && !p.follows_competing && p.counted_at_horizon);
        assert!(p.comparable && p.risk_ordered_and_typed);

        // censored partner observed earlier: not a competing-event partner,
        // though the literal comparability indicator still holds
        let p = PairIndicators::evaluate(
            3.0,
            EventLabel::new(1),
            2.0,
            EventLabel::CENSORED,
            10.0,
            d,
            0.9,
            0.1,
            EventLabel::new(1),
        );
        assert!(!p.precedes && !p.follows_competing);
        assert!(p.comparable);
    }
}
