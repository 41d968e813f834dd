//! End-to-end tests of the `jcsurv` binary: artifact contents, byte
//! determinism, configuration precedence, and exit codes.

use std::path::Path;
use std::process::{Command, Output};

use jcsurv::censoring::fit_km_censoring;
use jcsurv::data::Dataset;
use jcsurv::metrics::weighted_joint_concordance;
use jcsurv::risk::CovariateRiskModel;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jcsurv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

const HAND_CSV: &str = "\
id,time,event,risk1,risk2
a,1,1,0.9,0.2
b,2,2,0.1,0.8
c,3,1,0.05,0.3
";

#[test]
fn evaluate_reproduces_the_hand_instance() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("hand.csv");
    let out = dir.path().join("report.json");
    write(&data, HAND_CSV);

    let output = run(&[
        "evaluate",
        "--data",
        data.to_str().unwrap(),
        "--model",
        "precomputed",
        "--horizon",
        "10",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");

    let artifact: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(artifact["report"]["joint_concordance"], 0.8);
    assert_eq!(artifact["report"]["accuracy_star"], 0.8);
    assert_eq!(artifact["config"]["model"], "precomputed");

    // byte-identical to the library-level call with the same inputs
    let ds = Dataset::from_csv_path(&data).unwrap();
    let g = fit_km_censoring(&ds).unwrap();
    let expected =
        weighted_joint_concordance(&ds, &CovariateRiskModel::new(2), &g, 10.0).unwrap();
    assert_eq!(artifact["report"], serde_json::to_value(&expected).unwrap());

    // the data are uncensored, so this is also exactly the plain estimator
    let plain = jcsurv::metrics::joint_concordance(&ds, &CovariateRiskModel::new(2), 10.0).unwrap();
    assert_eq!(artifact["report"], serde_json::to_value(&plain).unwrap());
}

#[test]
fn evaluate_with_bootstrap_attaches_intervals() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("sim.csv");
    let out = dir.path().join("report.json");
    assert!(run(&[
        "simulate",
        "--n",
        "120",
        "--censoring",
        "0.3",
        "--seed",
        "5",
        "--out",
        data.to_str().unwrap(),
    ])
    .status
    .success());
    let output = run(&[
        "evaluate",
        "--data",
        data.to_str().unwrap(),
        "--model",
        "exp",
        "--bootstrap",
        "100",
        "--seed",
        "9",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let artifact: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let ci = &artifact["report"]["bootstrap_ci"]["joint_concordance"];
    assert!(ci["lower"].as_f64().unwrap() <= ci["upper"].as_f64().unwrap());
    assert_eq!(ci["level"], 0.95);
}

#[test]
fn all_censored_data_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.csv");
    write(&data, "id,time,event,x\na,1,0,0.1\nb,2,0,0.2\n");
    let output = run(&["evaluate", "--data", data.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    let err: serde_json::Value =
        serde_json::from_slice(&output.stderr).expect("stderr is json");
    assert_eq!(err["error"]["kind"], "data");
}

#[test]
fn usage_errors_exit_one() {
    let output = run(&["evaluate", "--no-such-flag"]);
    assert_eq!(output.status.code(), Some(1));
    // missing required input
    let output = run(&["evaluate"]);
    assert_eq!(output.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&output.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "usage");
}

#[test]
fn simulate_output_validates_and_reproduces_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        assert!(run(&[
            "simulate",
            "--n",
            "250",
            "--censoring",
            "0.5",
            "--seed",
            "42",
            "--out",
            path.to_str().unwrap(),
        ])
        .status
        .success());
    }
    let bytes_a = std::fs::read(&a).unwrap();
    let bytes_b = std::fs::read(&b).unwrap();
    assert_eq!(bytes_a, bytes_b);
    let ds = Dataset::from_csv_path(&a).unwrap();
    assert_eq!(ds.len(), 250);
    assert!(ds.has_censoring());
    // roughly half censored under the calibrated rate
    let censored = ds.records().iter().filter(|r| r.event.is_censored()).count();
    assert!((censored as f64 / 250.0 - 0.5).abs() < 0.15);
}

#[test]
fn table2_artifact_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let output = run(&[
            "simulate-table2",
            "--n",
            "4000",
            "--seed",
            "11",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(output.status.success(), "{output:?}");
        let stdout = String::from_utf8(output.stdout).unwrap();
        assert!(stdout.contains("joint_concordance"));
        assert!(stdout.contains("csc"));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn table1_artifact_satisfies_the_moment_identity() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t1.json");
    let output = run(&[
        "simulate-table1",
        "--model",
        "exp",
        "--censoring",
        "0.4",
        "--n",
        "300",
        "--replicates",
        "6",
        "--seed",
        "8",
        "--n-truth",
        "20000",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let artifact: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let row = &artifact["rows"][0];
    let rmse = row["rmse"].as_f64().unwrap();
    let se = row["se"].as_f64().unwrap();
    let bias = row["bias"].as_f64().unwrap();
    assert!((rmse.powi(2) - se.powi(2) - bias.powi(2)).abs() < 1e-10);
    assert_eq!(row["replicates_used"], 6);
    assert_eq!(artifact["config"]["truth"], "integral");
}

#[test]
fn fit_round_trips_through_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("sim.csv");
    let model = dir.path().join("model.json");
    let report = dir.path().join("report.json");
    assert!(run(&[
        "simulate",
        "--n",
        "400",
        "--censoring",
        "0.3",
        "--seed",
        "2",
        "--out",
        data.to_str().unwrap(),
    ])
    .status
    .success());
    assert!(run(&[
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--out",
        model.to_str().unwrap(),
    ])
    .status
    .success());
    // the model file uses the documented schema
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&model).unwrap()).unwrap();
    assert!(parsed["coefficients"].is_array());
    assert!(parsed["baselines"][0]["times"].is_array());
    assert!(parsed["covariate_means"].is_array());

    let output = run(&[
        "evaluate",
        "--data",
        data.to_str().unwrap(),
        "--model-file",
        model.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let artifact: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let jc = artifact["report"]["joint_concordance"].as_f64().unwrap();
    assert!(jc > 0.0 && jc < 1.0);
}

#[test]
fn rank_variables_renders_side_by_side_methods() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("multi.csv");
    // three covariates, two competing events, no censoring
    let mut csv = String::from("id,time,event,age,bp,noise\n");
    let mut state = 88172645463325252u64;
    let mut next = || {
        // xorshift, enough for a fixture
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    for i in 0..240 {
        let x1 = next() * 2.0 - 1.0;
        let x2 = next() * 2.0 - 1.0;
        let x3 = next() * 2.0 - 1.0;
        let t1 = -(1.0 - next()).ln() / (1.4 * x1).exp();
        let t2 = -(1.0 - next()).ln() / (0.5 * (1.4 * x2).exp());
        let (t, d) = if t1 < t2 { (t1, 1) } else { (t2, 2) };
        csv.push_str(&format!("s{i},{t},{d},{x1},{x2},{x3}\n"));
    }
    write(&data, &csv);
    let out = dir.path().join("ranks.json");
    let output = run(&[
        "rank-variables",
        "--data",
        data.to_str().unwrap(),
        "--methods",
        "stepwise_cr,stepwise_lumped",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let stdout = String::from_utf8(output.stdout).unwrap();
    let header = stdout.lines().next().unwrap();
    assert!(header.contains("rank"));
    assert!(header.contains("stepwise_cr"));
    assert!(header.contains("stepwise_lumped"));
    let artifact: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(artifact["results"].as_array().unwrap().len(), 2);
}

#[test]
fn single_covariate_ranking_warns_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("one.csv");
    let mut csv = String::from("id,time,event,x\n");
    for i in 0..60 {
        let x = (i as f64 / 60.0) * 2.0 - 1.0;
        let t = 0.1 + (i as f64 * 0.37) % 5.0;
        let d = 1 + (i % 2);
        csv.push_str(&format!("s{i},{t},{d},{x}\n"));
    }
    write(&data, &csv);
    let output = run(&["rank-variables", "--data", data.to_str().unwrap()]);
    assert!(output.status.success(), "{output:?}");
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("trivial"));
}

#[test]
fn config_file_applies_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("sim.csv");
    write(
        &cfg,
        &format!(
            "# simulation settings\nn = 100\nseed = 12\nout = {}\n",
            out.display()
        ),
    );
    // config alone
    let output = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert!(output.status.success(), "{output:?}");
    assert_eq!(Dataset::from_csv_path(&out).unwrap().len(), 100);
    // flag wins over the file
    let output = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--n",
        "57",
    ]);
    assert!(output.status.success());
    assert_eq!(Dataset::from_csv_path(&out).unwrap().len(), 57);
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("\"n\": 57"));
    // unknown keys are rejected
    write(&cfg, "n = 100\nnn = 5\n");
    let output = run(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn simulate_emits_the_oracle_report_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("sim.csv");
    let oracle = dir.path().join("oracle.json");
    let output = run(&[
        "simulate",
        "--n",
        "100",
        "--seed",
        "4",
        "--out",
        data.to_str().unwrap(),
        "--oracle-out",
        oracle.to_str().unwrap(),
        "--oracle-n",
        "100000",
    ]);
    assert!(output.status.success(), "{output:?}");
    let artifact: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&oracle).unwrap()).unwrap();
    let jc = artifact["report"]["joint_concordance"].as_f64().unwrap();
    assert!((jc - 0.52).abs() < 0.01);
}
