use std::fs;

use maser_cli::{emit_outputs, run_scenario, summary_text, CliError, ScenarioSpec};

mod common;
use common::{with_line, SHORT_DISCRETE, SHORT_HERALDED};

#[test]
fn closed_form_columns_only_where_exact() {
    let spec = ScenarioSpec::parse(SHORT_HERALDED).unwrap();
    let b = run_scenario(&spec).unwrap();
    let heralded = b.file("timeseries_heralded.csv").unwrap();
    let trace = b.file("timeseries_trace.csv").unwrap();
    let row = heralded.lines().nth(5).unwrap();
    assert!(!row.split(',').nth(2).unwrap().contains("NaN"));
    // Tracing a |+> spin is not a fixed displacement.
    assert_eq!(
        trace.lines().nth(5).unwrap().split(',').nth(2).unwrap(),
        "NaN"
    );
    assert!(b.summary["curves"]["trace"]["analytic"].is_null());
}

#[test]
fn early_trajectory_follows_closed_form() {
    let spec = ScenarioSpec::parse(SHORT_HERALDED).unwrap();
    let b = run_scenario(&spec).unwrap();
    for line in b.file("timeseries_heralded.csv").unwrap().lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((v[1] - v[2]).abs() <= 0.02 * v[2], "{line}");
        assert!((v[3] - v[4]).abs() < 0.05, "{line}");
    }
}

#[test]
fn summary_keys_are_sorted_and_rounded() {
    let spec = ScenarioSpec::parse(SHORT_HERALDED).unwrap();
    let b = run_scenario(&spec).unwrap();
    let text = summary_text(&b);
    let top: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("  \"") && !l.starts_with("   "))
        .map(|l| l.trim().split('"').nth(1).unwrap())
        .collect();
    let mut sorted = top.clone();
    sorted.sort();
    assert_eq!(top, sorted);
    assert!(top.contains(&"P_S") && top.contains(&"parameters") && top.contains(&"seed"));
    assert_eq!(b.summary["P_S"], 0.5);
}

#[test]
fn sampled_discrete_runs_depend_only_on_seed() {
    let spec = ScenarioSpec::parse(SHORT_DISCRETE).unwrap();
    let a = run_scenario(&spec).unwrap();
    let b = run_scenario(&spec).unwrap();
    assert_eq!(a.files, b.files);
    assert_eq!(summary_text(&a), summary_text(&b));
    let c = run_scenario(&spec.clone().with_seed(99)).unwrap();
    assert_ne!(a.files, c.files);
}

#[test]
fn failed_emission_removes_staged_files() {
    let spec =
        ScenarioSpec::parse(&with_line(SHORT_HERALDED, "outputs", "outputs = [\"pn\"]")).unwrap();
    let b = run_scenario(&spec).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    // A non-empty directory where pn.csv should go makes the final move fail.
    fs::create_dir_all(tmp.path().join("pn.csv/blocker")).unwrap();
    let err = emit_outputs(&b, tmp.path()).unwrap_err();
    assert!(matches!(err, CliError::Io { .. }));
    assert_eq!(err.exit_code(), 2);
    let left: Vec<String> = fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(left, ["pn.csv"]);
}

#[test]
fn discrete_rejects_ode_only_outputs() {
    let text = with_line(SHORT_DISCRETE, "outputs", "outputs = [\"wigner\"]");
    assert!(matches!(
        ScenarioSpec::parse(&text),
        Err(CliError::Config(_))
    ));
}
