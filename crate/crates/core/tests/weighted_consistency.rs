//! The censoring-adjusted per-event concordance and accuracy on censored
//! cohorts track the values the uncensored estimators give on uncensored
//! cohorts of the same process.

use jcsurv::censoring::fit_km_censoring;
use jcsurv::data::{evaluation_horizon, EventLabel};
use jcsurv::metrics::{weighted_accuracy, weighted_concordance};
use jcsurv::models::ExpModel;
use jcsurv::synth::{calibrate_censoring_rate, generate, SynthConfig};

#[test]
fn weighted_metrics_recover_uncensored_benchmarks_under_censoring() {
    let base = SynthConfig::uncensored(100_000, 314);
    let horizon = evaluation_horizon(&generate(&base), 0.75).unwrap();

    let lambda0 = calibrate_censoring_rate(&base, 0.5, 1e-4).unwrap();
    let ds = generate(
        &SynthConfig {
            n: 10_000,
            ..base
        }
        .with_censoring(lambda0, 0.0),
    );
    let g = fit_km_censoring(&ds).unwrap();

    let c1 = weighted_concordance(&ds, &ExpModel, &g, horizon, EventLabel::new(1)).unwrap();
    let c2 = weighted_concordance(&ds, &ExpModel, &g, horizon, EventLabel::new(2)).unwrap();
    let a = weighted_accuracy(&ds, &ExpModel, &g, horizon).unwrap();
    assert!((c1 - 0.75).abs() < 0.025, "C1 = {c1}");
    assert!((c2 - 0.60).abs() < 0.025, "C2 = {c2}");
    assert!((a - 0.70).abs() < 0.025, "A = {a}");
}
