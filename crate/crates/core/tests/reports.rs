use std::path::PathBuf;

use postsel::harness::{analyze_csv, simulate_coverage, AnalysisOptions, Report, SimulationConfig};
use postsel::inference::SigmaSpec;

fn small_study() -> SimulationConfig {
    SimulationConfig {
        n: 30,
        p: 5,
        beta: vec![1.0, 2.0, 0.0, 0.0, 0.0],
        reps: 60,
        new_points: 4,
        sigma_strategies: vec![SigmaSpec::Known(1.0), SigmaSpec::MseFull],
        master_seed: 11,
        ..SimulationConfig::default()
    }
}

fn us_change() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/us_change.csv")
}

#[test]
fn analysis_report_round_trips_through_json() {
    let options = AnalysisOptions {
        response: "Consumption".into(),
        sigma_strategies: vec![SigmaSpec::MseFull, SigmaSpec::MseAic, SigmaSpec::Known(0.3)],
        ..AnalysisOptions::default()
    };
    let report = Report::from_analysis(&analyze_csv(&us_change(), &options).unwrap());
    let back = Report::from_json(&report.to_json()).unwrap();
    assert_eq!(back, report);
    assert!(report.simulation.is_none());
}

#[test]
fn simulation_report_round_trips_through_json() {
    let report = Report::from_coverage(&simulate_coverage(&small_study()).unwrap());
    let back = Report::from_json(&report.to_json()).unwrap();
    assert_eq!(back, report);
    assert!(report.simulation.is_some());
}

#[test]
fn identical_configurations_give_identical_bytes() {
    let mut config = small_study();
    let first = Report::from_coverage(&simulate_coverage(&config).unwrap()).to_json();
    let again = Report::from_coverage(&simulate_coverage(&config).unwrap()).to_json();
    assert_eq!(first, again);

    config.workers = Some(2);
    let mut threaded = Report::from_coverage(&simulate_coverage(&config).unwrap());
    threaded.config = Report::from_json(&first).unwrap().config;
    assert_eq!(threaded.to_json(), first);

    config.workers = None;
    config.master_seed += 1;
    let other = Report::from_coverage(&simulate_coverage(&config).unwrap()).to_json();
    assert_ne!(first, other);
}

#[test]
fn configuration_survives_toml() {
    let config = small_study();
    let back = SimulationConfig::from_toml(&config.to_toml()).unwrap();
    assert_eq!(back, config);
}

#[test]
fn plot_tables_have_one_column_per_corrected_strategy() {
    let report = Report::from_coverage(&simulate_coverage(&small_study()).unwrap());
    let tables = report.plot_tables();
    let (_, by_point) = tables.iter().find(|(name, _)| name == "coverage_by_point.tsv").unwrap();
    for line in by_point.lines() {
        assert_eq!(line.split('\t').count(), 2 + 2);
    }
    assert_eq!(by_point.lines().count(), 1 + 4);
    for name in ["classical_by_point.tsv", "size_histogram.tsv", "coverage_by_size.tsv"] {
        assert!(tables.iter().any(|(n, _)| n == name), "{name}");
    }
}
