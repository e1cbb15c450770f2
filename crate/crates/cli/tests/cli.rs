use std::fs;
use std::path::Path;
use std::process::{Command, Output};

mod common;
use common::{with_line, SHORT_DISCRETE, SHORT_HERALDED};

fn maser(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maser"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().into_string().unwrap(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

#[test]
fn list_scenarios_names_every_bundled_file() {
    let out = maser(&["list-scenarios"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["fig2", "fig3", "fig4", "fig5"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{text}");
    }
}

#[test]
fn run_writes_csv_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "short.toml", SHORT_HERALDED);
    let out_dir = tmp.path().join("out");
    let out = maser(&["run", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let names: Vec<String> = read_dir_sorted(&out_dir)
        .into_iter()
        .map(|(n, _)| n)
        .collect();
    let expected = [
        "linewidth_sweep.csv",
        "pn.csv",
        "pn_initial.csv",
        "pump_sweep.csv",
        "summary.json",
        "timeseries_heralded.csv",
        "timeseries_trace.csv",
        "wigner.csv",
        "wigner_initial.csv",
    ];
    assert_eq!(names, expected);

    let series = fs::read_to_string(out_dir.join("timeseries_heralded.csv")).unwrap();
    assert!(!series.contains('\r'));
    let mut lines = series.lines();
    assert_eq!(
        lines.next().unwrap(),
        "time,mean_phonons_numeric,mean_phonons_analytic,g2_numeric,g2_analytic,trace_drift"
    );
    assert_eq!(lines.count(), 40);
    assert_eq!(
        fs::read_to_string(out_dir.join("pn.csv"))
            .unwrap()
            .lines()
            .next()
            .unwrap(),
        "n,p_numeric,p_analytic,p_poisson"
    );
    let pn0 = fs::read_to_string(out_dir.join("pn_initial.csv")).unwrap();
    assert!(pn0.lines().nth(1).unwrap().starts_with("0,0.909090909091,"));
    assert_eq!(
        fs::read_to_string(out_dir.join("wigner.csv"))
            .unwrap()
            .lines()
            .next()
            .unwrap(),
        "re_alpha,im_alpha,w"
    );

    // No cell carries more than 12 significant digits.
    for cell in series.lines().skip(1).flat_map(|l| l.split(',')) {
        let digits: String = cell
            .split('e')
            .next()
            .unwrap()
            .chars()
            .filter(|c| c.is_ascii_digit())
            .collect();
        assert!(digits.trim_start_matches('0').len() <= 12, "{cell}");
    }

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["parameters"]["cutoff"], 16);
    assert_eq!(summary["parameters"]["delta_t"], 41.0);
    assert!(summary["versions"]["maser_core"].is_string());
}

#[test]
fn cutoff_and_seed_overrides_are_echoed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "spins.toml", SHORT_DISCRETE);
    let dir = tmp.path().join("o");
    let out = maser(&[
        "run",
        &cfg,
        "--out",
        dir.to_str().unwrap(),
        "--cutoff",
        "10",
        "--seed",
        "5",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["parameters"]["cutoff"], 10);
    assert_eq!(summary["seed"], 5);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "spins.toml", SHORT_DISCRETE);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(maser(&["run", &cfg, "--out", a.to_str().unwrap()])
        .status
        .success());
    assert!(maser(&["run", &cfg, "--out", b.to_str().unwrap()])
        .status
        .success());
    assert_eq!(read_dir_sorted(&a), read_dir_sorted(&b));

    let c = tmp.path().join("c");
    assert!(
        maser(&["run", &cfg, "--out", c.to_str().unwrap(), "--seed", "12"])
            .status
            .success()
    );
    assert_ne!(read_dir_sorted(&a), read_dir_sorted(&c));
}

#[test]
fn empty_outputs_write_only_the_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "s.toml",
        &with_line(SHORT_HERALDED, "outputs", "outputs = []"),
    );
    let dir = tmp.path().join("o");
    assert!(maser(&["run", &cfg, "--out", dir.to_str().unwrap()])
        .status
        .success());
    let names: Vec<String> = read_dir_sorted(&dir).into_iter().map(|(n, _)| n).collect();
    assert_eq!(names, ["summary.json"]);
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let typo = write(
        tmp.path(),
        "typo.toml",
        &(SHORT_HERALDED.to_string() + "kapa = 3\n"),
    );
    for args in [
        vec!["run", "no-such-scenario"],
        vec!["run", typo.as_str()],
        vec!["run", "fig2", "--cutoff", "1"],
        vec!["verify", "--dim", "65"],
        vec!["frobnicate"],
    ] {
        let out = maser(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn numeric_failure_exits_3_and_leaves_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    // A loose integrator tolerance drives the state slightly non-positive.
    let text = with_line(
        &with_line(&with_line(SHORT_HERALDED, "channels", "channels = [\"failures\"]"), "t_end", "t_end = 640000"),
        "atol",
        "atol = 1e-4\nrtol = 1e-3\npost_up = 0.9\npost_down = -0.1\npre_up = 0.4\npre_down = 0.6\nkappa_over_lambda = 0.014",
    );
    let text = text
        .lines()
        .filter(|l| {
            ![
                "post_up = 0.0",
                "post_down = 1.0",
                "pre_up = 1.0",
                "pre_down = 1.0",
                "kappa_over_lambda = 0.01",
            ]
            .contains(l)
        })
        .collect::<Vec<_>>()
        .join("\n");
    let cfg = write(tmp.path(), "bad.toml", &text);
    let dir = tmp.path().join("out");
    let out = maser(&["run", &cfg, "--out", dir.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(!dir.exists());
}

#[test]
fn verify_passes_at_small_dimension() {
    let out = maser(&["verify", "--dim", "12"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 10);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}
