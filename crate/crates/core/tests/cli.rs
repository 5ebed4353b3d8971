mod common;

use std::fs;
use std::process::Command;

use common::{data_path, run_cli, temp_dir};
use riskshap::models::{save_model, ModelSpec};
use riskshap::synthetic::correlated_normals;
use serde_json::Value;

/// Path as a `'static` argument string (leaked; tests are short-lived).
fn p(path: impl AsRef<std::path::Path>) -> &'static str {
    Box::leak(path.as_ref().to_str().unwrap().to_string().into_boxed_str())
}

#[test]
fn linear_demo_is_complete() {
    let (code, out, err) = run_cli(&[
        "attribute",
        "--model",
        p(data_path("two_assets_model.json")),
        "--input",
        p(data_path("two_assets.csv")),
        "--date-column",
        "date",
    ]);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["completeness_residual"].as_f64().unwrap() <= 1e-12);
    assert_eq!(v["features"][1], "equities");
    assert!(err.contains("exact attribution"));
}

#[test]
fn sampled_runs_are_byte_identical() {
    let args = [
        "attribute",
        "--model",
        p(data_path("two_assets_model.json")),
        "--input",
        p(data_path("two_assets.csv")),
        "--date-column",
        "date",
        "--risk",
        "cvar",
        "--alpha",
        "0.05",
        "--method",
        "sampled",
        "--permutations",
        "500",
        "--seed",
        "7",
    ];
    let (c1, a, _) = run_cli(&args);
    let mut with_threads = args.to_vec();
    with_threads.extend(["--threads", "3"]);
    let (c2, b, _) = run_cli(&with_threads);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["method"]["kind"], "sampled");
    assert!(v["stderr"].is_array());
}

#[test]
fn gaussian_fixture_recovers_two_three() {
    let dir = temp_dir("gauss");
    let x = correlated_normals(200_000, &[0.0, 0.0], &[9.0, 0.0, 0.0, 16.0], 2024).unwrap();
    x.save_csv(dir.join("gauss.csv")).unwrap();
    save_model(&ModelSpec::<f64>::linear(vec![1.0, 1.0]), dir.join("sum.json")).unwrap();
    let (code, out, err) = run_cli(&[
        "attribute",
        "--model",
        p(dir.join("sum.json")),
        "--input",
        p(dir.join("gauss.csv")),
    ]);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    let a: Vec<f64> = v["attributions"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((a[0] - 2.0).abs() / 2.0 < 0.02, "{a:?}");
    assert!((a[1] - 3.0).abs() / 3.0 < 0.02, "{a:?}");
}

#[test]
fn residual_augmentation_adds_idiosyncratic_feature() {
    let (code, out, err) = run_cli(&[
        "attribute",
        "--model",
        p(data_path("factor_model.json")),
        "--input",
        p(data_path("factors.csv")),
        "--residuals",
        p(data_path("stock.csv")),
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0, "{err}");
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "feature,attribution");
    assert!(lines[3].starts_with("idiosyncratic,"));
    // the augmented model reproduces the stock, so the total is its std
    let y = riskshap::data_io::load_csv::<f64>(data_path("stock.csv"), &Default::default()).unwrap();
    let sd = riskshap::RiskMeasureSpec::std_dev().evaluate(&y.column(0)).unwrap();
    let total: f64 = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - sd).abs() < 1e-12);
}

#[test]
fn svg_chart_is_written() {
    let dir = temp_dir("svg");
    let chart = dir.join("chart.svg");
    let (code, _, _) = run_cli(&[
        "attribute",
        "--model",
        p(data_path("two_assets_model.json")),
        "--input",
        p(data_path("two_assets.csv")),
        "--date-column",
        "date",
        "--svg",
        p(&chart),
    ]);
    assert_eq!(code, 0);
    let svg = fs::read_to_string(chart).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("bonds") && svg.contains("equities"));
}

#[test]
fn bam_command() {
    let dir = temp_dir("bam");
    save_model(&ModelSpec::<f64>::linear(vec![1.0, 1.0]), dir.join("sum.json")).unwrap();
    let (code, out, _) = run_cli(&["bam", "--model", p(dir.join("sum.json")), "--explicand", "1,2"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["attributions"], serde_json::json!([1.0, 2.0]));
    let (code, out, _) = run_cli(&[
        "bam",
        "--model",
        p(dir.join("sum.json")),
        "--explicand",
        "-1,2",
        "--baseline",
        "-1,2",
    ]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["attributions"], serde_json::json!([0.0, 0.0]));
}

#[test]
fn optimize_cvar_reduces_risk() {
    let (code, out, err) = run_cli(&["optimize-cvar", "--input", p(data_path("five_assets.csv")), "--date-column", "date"]);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    let after = v["cvar_after"].as_f64().unwrap();
    let before: Vec<f64> = v["cvar_before"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(before.iter().all(|&b| after <= b));
    let w: f64 = v["weights"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).sum();
    assert!((w - 1.0).abs() < 1e-9);
}

#[test]
fn check_axioms_on_linear_portfolio() {
    let (code, out, _) = run_cli(&[
        "check-axioms",
        "--model",
        p(data_path("two_assets_model.json")),
        "--input",
        p(data_path("two_assets.csv")),
        "--date-column",
        "date",
        "--risk",
        "cvar",
        "--alpha",
        "0.05",
    ]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["passed"], true);
    let bound = v["checks"].as_array().unwrap().iter().find(|c| c["check"] == "subadditivity_bound").unwrap();
    assert_eq!(bound["assertion_held"], true);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = temp_dir("config");
    let cfg = dir.join("run.conf");
    fs::write(
        &cfg,
        format!(
            "model = \"{}\"\ninput = \"{}\"\ndate_column = \"date\"\nrisk = \"varq\"\nalpha = 0.5\n",
            p(data_path("two_assets_model.json")),
            p(data_path("two_assets.csv"))
        ),
    )
    .unwrap();
    let (code, from_cfg, err) = run_cli(&["attribute", "--config", p(&cfg), "--alpha", "0.05"]);
    assert_eq!(code, 0, "{err}");
    let (_, direct, _) = run_cli(&[
        "attribute",
        "--model",
        p(data_path("two_assets_model.json")),
        "--input",
        p(data_path("two_assets.csv")),
        "--date-column",
        "date",
        "--risk",
        "varq",
        "--alpha",
        "0.05",
    ]);
    assert_eq!(from_cfg, direct);
}

#[test]
fn input_errors_exit_one() {
    let dir = temp_dir("errors");
    fs::write(dir.join("bad.csv"), "a,b\n1,2\n3,\n").unwrap();
    let (code, out, err) = run_cli(&[
        "attribute",
        "--model",
        p(data_path("two_assets_model.json")),
        "--input",
        p(dir.join("bad.csv")),
    ]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("line 3"), "{err}");

    let (code, _, err) = run_cli(&[
        "attribute",
        "--model",
        p(data_path("two_assets_model.json")),
        "--input",
        p(data_path("two_assets.csv")),
        "--date-column",
        "date",
        "--risk",
        "cvar",
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("--alpha"));
}

#[test]
fn guard_errors_exit_two() {
    let (code, _, err) = run_cli(&[
        "attribute",
        "--model",
        p(data_path("two_assets_model.json")),
        "--input",
        p(data_path("two_assets.csv")),
        "--date-column",
        "date",
        "--max-players",
        "1",
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("sampled"), "{err}");
}

#[test]
fn axiom_failure_maps_to_exit_three() {
    // the exact engine cannot produce a failing report, so only the mapping
    // is checked here
    assert_eq!(riskshap::cli::CliError::AxiomFailure("x".into()).exit_code(), 3);
}

#[test]
fn binary_exit_codes_and_streams() {
    let bin = env!("CARGO_BIN_EXE_riskshap");
    let ok = Command::new(bin)
        .args(["bam", "--model", p(data_path("two_assets_model.json")), "--explicand", "1,1"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(serde_json::from_slice::<Value>(&ok.stdout).is_ok());
    let bad = Command::new(bin).args(["attribute", "--model", "/nonexistent.json", "--input", "x.csv"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(bad.stdout.is_empty() && !bad.stderr.is_empty());
}

#[test]
fn bsm_scenario_then_attribute() {
    let dir = temp_dir("bsm");
    let (code, out, err) = run_cli(&[
        "bsm-scenario",
        "--input",
        p(data_path("market_year.csv")),
        "--date-column",
        "date",
        "--scenarios-out",
        p(dir.join("scen.csv")),
        "--model-out",
        p(dir.join("call.json")),
    ]);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["rows"], 252);
    let baseline = v["baseline_row"].as_str().unwrap().to_string();
    let (code, out, err) = run_cli(&[
        "attribute",
        "--model",
        p(dir.join("call.json")),
        "--input",
        p(dir.join("scen.csv")),
        "--baseline",
        &baseline,
    ]);
    assert_eq!(code, 0, "{err}");
    let r: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(r["features"][0], "log_price");
}

#[test]
fn incompatibilities_command_prints_report() {
    let (code, out, _) = run_cli(&["incompatibilities"]);
    assert_eq!(code, 0);
    assert!(out.contains("Linearity") && out.contains("degenerate"));
}
