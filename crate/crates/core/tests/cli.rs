use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use inls::experiments::{read_observables_csv, SweepSummary, CSV_HEADER, ERROR_FILE, OBSERVABLES_FILE, REPORT_FILE, SUMMARY_FILE};

fn inls(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_inls")).args(args).output().unwrap()
}

fn write_config(dir: &Path, extra: &str) -> String {
    let text = format!(
        r#"{{
            "grid": {{"L": 20.0, "N": 256}},
            "params": {{"alpha": 4.0, "b": 0.5}},
            "time": {{"dt": 0.01, "t_max": 0.2, "output_every": 5}},
            "initial": {{"kind": "odd_gaussian", "amplitude": 1.0, "width": 1.0}}{extra}
        }}"#
    );
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn evolve_writes_csv_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "");
    let out = dir.path().join("run");
    let res = inls(&["evolve", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = fs::read_to_string(out.join(OBSERVABLES_FILE)).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
    let rows = read_observables_csv(out.join(OBSERVABLES_FILE)).unwrap();
    assert_eq!(rows.len(), 5);
    for r in &rows {
        r.check_invariants().unwrap();
    }
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join(REPORT_FILE)).unwrap()).unwrap();
    assert!(report["mass_drift"].as_f64().unwrap() < 1e-12);
}

#[test]
fn evolve_zero_horizon_is_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "").replace("config.json", "config0.json");
    let text = fs::read_to_string(dir.path().join("config.json")).unwrap().replace("\"t_max\": 0.2", "\"t_max\": 0.0");
    fs::write(&config, text).unwrap();
    let out = dir.path().join("run");
    let res = inls(&["evolve", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(res.status.success());
    let rows = read_observables_csv(out.join(OBSERVABLES_FILE)).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].t, 0.0);
}

#[test]
fn unknown_key_exits_2_with_error_json() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#", "colour": "blue""#);
    let out = dir.path().join("run");
    let res = inls(&["evolve", "--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    let body: serde_json::Value = serde_json::from_slice(&res.stderr).unwrap();
    assert_eq!(body["error"], "config");
    assert!(!out.join(OBSERVABLES_FILE).exists());
}

#[test]
fn wall_abort_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#", "wall_policy": "abort""#);
    let text = fs::read_to_string(&config)
        .unwrap()
        .replace("\"t_max\": 0.2", "\"t_max\": 4.0")
        .replace(
            r#""kind": "odd_gaussian", "amplitude": 1.0, "width": 1.0"#,
            r#""kind": "sine_packet", "amplitude": 1.0, "width": 4.0, "center": 3.0, "wavenumber": 8.0"#,
        );
    fs::write(&config, text).unwrap();
    let out = dir.path().join("run");
    fs::create_dir_all(&out).unwrap();
    let res = inls(&["evolve", "--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3));
    let body: serde_json::Value = serde_json::from_slice(&res.stderr).unwrap();
    assert_eq!(body["error"], "wall_reflection");
    assert!(out.join(ERROR_FILE).exists());
}

#[test]
fn hardy_report_is_reproducible_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#", "hardy": {"samples": 200}"#);
    let text = fs::read_to_string(&config).unwrap().replace("\"L\": 20.0, \"N\": 256", "\"L\": 40.0, \"N\": 2048");
    fs::write(&config, text).unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let res = inls(&["hardy", "--config", &config, "--out", out.to_str().unwrap(), "--seed", "42"]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        fs::read(out.join(REPORT_FILE)).unwrap()
    };
    let a = run("a");
    assert_eq!(a, run("b"));
    let report: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(report["seed"], 42);
    assert_eq!(report["cases"].as_array().unwrap().len(), 200);
    assert_eq!(report["passed"], true);
}

#[test]
fn sweep_creates_nine_run_dirs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#", "sweep": {"alpha": [3.5, 4.0, 5.0], "b": [0.25, 0.5, 0.75]}"#);
    let out = dir.path().join("sweep");
    let res = inls(&["sweep", "--config", &config, "--out", out.to_str().unwrap(), "--workers", "3"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let dirs = fs::read_dir(&out).unwrap().filter(|e| e.as_ref().unwrap().path().is_dir()).count();
    assert_eq!(dirs, 9);
    let summary: SweepSummary = serde_json::from_str(&fs::read_to_string(out.join(SUMMARY_FILE)).unwrap()).unwrap();
    assert_eq!(summary.runs.len(), 9);
    assert_eq!(summary.failures, 0);
}

#[test]
fn linear_only_flag_switches_off_the_nonlinearity() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#", "scatter": {"window": [0.05, 0.1, 0.15, 0.2], "tol": 1e-10}"#,
    );
    let out = dir.path().join("lin");
    let res = inls(&["scatter", "--config", &config, "--out", out.to_str().unwrap(), "--linear-only"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join(REPORT_FILE)).unwrap()).unwrap();
    assert_eq!(report["coupling"], "linear_only");
    assert_eq!(report["scattering"]["verdict"], "scattered");
    for r in report["scattering"]["residuals"].as_array().unwrap() {
        assert!(r.as_f64().unwrap() < 1e-12);
    }
}

#[test]
fn convergence_reports_second_order() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#", "convergence": {"t_final": 0.2, "dt_list": [0.004, 0.002, 0.001]}"#);
    let out = dir.path().join("conv");
    let res = inls(&["convergence", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join(REPORT_FILE)).unwrap()).unwrap();
    let order = report["estimate"]["order"]["value"].as_f64().unwrap();
    assert!((1.8..=2.2).contains(&order), "order {order}");
}

#[test]
fn missing_config_exits_2() {
    let res = inls(&["evolve"]);
    assert_eq!(res.status.code(), Some(2));
}
