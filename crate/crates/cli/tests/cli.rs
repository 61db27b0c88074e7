mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::scenario_path;

fn qsl(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsl"))
        .args(args)
        .env("QSL_OUTPUT_DIR", out_dir)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("scenario.conf");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn validate_accepts_every_shipped_scenario() {
    let out = tempfile::tempdir().unwrap();
    for name in common::SCENARIOS {
        let o = qsl(
            &["validate", scenario_path(name).to_str().unwrap()],
            out.path(),
        );
        assert!(
            o.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    assert_eq!(fs::read_dir(out.path()).unwrap().count(), 0);
}

#[test]
fn bad_state_name_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "scenario.name = x\nstate.name = plusX\nsource.kind = monochromatic\n",
    );
    for cmd in ["validate", "trajectory"] {
        let o = qsl(&[cmd, &cfg], dir.path());
        assert_eq!(o.status.code(), Some(2));
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(":2: state.name:"), "{err}");
    }
}

#[test]
fn missing_config_file_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = qsl(&["trajectory", "/nonexistent/none.conf"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn trajectory_writes_schema_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "scenario.name = plus\nstate.name = plus\nsource.kind = monochromatic\n",
    );
    let out = dir.path().join("out");
    let o = qsl(&["trajectory", &cfg], &out);
    assert!(o.status.success());
    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with(
        "l,a,a_dot,a_dot_c,a_dot_i,lower,upper,b_ci_plus,b_ci_minus,b_ic_plus,b_ic_minus,mt,pure_upper,qfi_c,qfi_i,delta_ac,delta_ai,purity\n"
    ));
    assert_eq!(csv.lines().count(), 42);
    assert!(!csv.contains('\r'));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert!((summary["max_speed"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-6);
    assert!((summary["l_star"].as_f64().unwrap() - 0.25).abs() < 1e-6);
    assert_eq!(summary["sandwich_violations"], 0);
    assert_eq!(summary["lower_bound_tight"], true);
}

#[test]
fn noisy_pair_summary_reports_lower_bound_gap() {
    let dir = tempfile::tempdir().unwrap();
    let o = qsl(
        &["trajectory", scenario_path("pp_noise").to_str().unwrap()],
        dir.path(),
    );
    assert!(o.status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    let gap = summary["max_lower_gap"].as_f64().unwrap();
    assert!(gap >= 0.0);
    assert_eq!(summary["lower_bound_tight"], gap < 0.1);
    assert_eq!(summary["reference_max_speed"], 1.391);
}

#[test]
fn experiment_needs_its_block() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "scenario.name = plus\nstate.name = plus\nsource.kind = monochromatic\n",
    );
    assert_eq!(
        qsl(&["experiment", &cfg], dir.path()).status.code(),
        Some(2)
    );
}

#[test]
fn sweep_reports_heisenberg_scaling() {
    let dir = tempfile::tempdir().unwrap();
    let o = qsl(&["sweep-n", "--kind", "ghz", "--n-max", "4"], dir.path());
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("sweep_ghz.csv")).unwrap();
    for (n, line) in csv.lines().skip(1).enumerate() {
        let bound: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((bound - (n + 1) as f64 * std::f64::consts::PI).abs() < 1e-9);
    }
    assert_eq!(
        qsl(&["sweep-n", "--kind", "ghz", "--n-max", "0"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        qsl(&["sweep-n", "--kind", "bogus", "--n-max", "2"], dir.path())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn experiment_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let body = fs::read_to_string(scenario_path("pp"))
        .unwrap()
        .replace("experiment.resamples = 10000", "experiment.resamples = 300");
    let cfg = write_config(dir.path(), &body);
    let mut runs = Vec::new();
    for threads in ["1", "3", "8"] {
        let out = dir.path().join(format!("t{threads}"));
        assert!(qsl(&["--threads", threads, "experiment", &cfg], &out)
            .status
            .success());
        runs.push((
            fs::read(out.join("experiment.csv")).unwrap(),
            fs::read(out.join("trajectory.csv")).unwrap(),
        ));
    }
    assert!(runs.windows(2).all(|w| w[0] == w[1]));
}
