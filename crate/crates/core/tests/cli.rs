use std::path::PathBuf;
use std::process::{Command, Output};

use postsel::harness::Report;

fn fixture() -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data/us_change.csv")
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_postsel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report_of(out: &Output) -> Report {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    Report::from_json(&String::from_utf8(out.stdout.clone()).unwrap()).unwrap()
}

#[test]
fn select_reports_scores_and_model() {
    let data = fixture();
    let out = run(&["select", "--data", &data, "--response", "Consumption", "--intercept"]);
    let report = report_of(&out);
    assert_eq!(
        report.selected_model,
        ["(Intercept)", "Income", "Production", "Savings", "Unemployment"]
    );
    assert_eq!(report.scores.len(), 15);
    assert!(report.targets.is_empty());
}

#[test]
fn ci_reports_classical_and_corrected_rows() {
    let data = fixture();
    let out = run(&[
        "ci",
        "--data",
        &data,
        "--response",
        "Consumption",
        "--intercept",
        "--target",
        "coef:Production",
        "--sigma",
        "mse-full",
        "--sigma",
        "known:0.31",
    ]);
    let report = report_of(&out);
    let methods: Vec<&str> = report.targets.iter().map(|t| t.method.as_str()).collect();
    assert_eq!(
        methods,
        ["classical_t", "classical:mse-full", "classical:known:0.31", "corrected:mse-full", "corrected:known:0.31"]
    );
    assert!(report.targets.iter().all(|t| t.name == "Production"));
}

#[test]
fn analyze_csv_format_lists_every_coefficient() {
    let data = fixture();
    let out = run(&[
        "analyze",
        "--data",
        &data,
        "--response",
        "Consumption",
        "--intercept",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    for name in ["Income", "Production", "Savings", "Unemployment"] {
        assert!(rows.iter().any(|r| &r[0] == name));
    }
}

#[test]
fn simulate_writes_plot_tables() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("study.toml");
    std::fs::write(&config, "n = 30\np = 4\nbeta = [1.0, 2.0, 0.0, 0.0]\nreps = 40\nnew_points = 3\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "5",
        "--sigma",
        "known:1",
        "--sigma",
        "mse-full",
        "--format",
        "plotdata",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(out_dir.join("coverage_by_point.tsv")).unwrap();
    let header: Vec<&str> = table.lines().next().unwrap().split('\t').collect();
    assert_eq!(header.len(), 2 + 2);
    assert_eq!(table.lines().count(), 1 + 3);
}

#[test]
fn bad_input_exits_with_two() {
    let data = fixture();
    let missing = run(&["select", "--data", "/nonexistent/file.csv", "--response", "y"]);
    assert_eq!(missing.status.code(), Some(2));
    let column = run(&["select", "--data", &data, "--response", "Nope"]);
    assert_eq!(column.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&column.stderr).starts_with("error:"));
    let alpha = run(&["analyze", "--data", &data, "--response", "Consumption", "--alpha", "1.5"]);
    assert_eq!(alpha.status.code(), Some(2));
    let sigma = run(&["analyze", "--data", &data, "--response", "Consumption", "--sigma", "guess"]);
    assert_eq!(sigma.status.code(), Some(2));
}

#[test]
fn collinear_design_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("collinear.csv");
    let mut text = String::from("y,a,b\n");
    for i in 0..12 {
        let a = i as f64 * 0.5 - 2.0;
        text.push_str(&format!("{},{},{}\n", (i * 7 % 5) as f64, a, 2.0 * a));
    }
    std::fs::write(&path, text).unwrap();
    let out = run(&["select", "--data", path.to_str().unwrap(), "--response", "y"]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}
