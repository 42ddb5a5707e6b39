use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use stfreq::cli::run;
use stfreq_core::simulate::simulate_white;
use stfreq_core::{Panel, StationSet};

fn run_args(args: &[&str]) -> i32 {
    let mut argv = vec!["stfreq"];
    argv.extend_from_slice(args);
    run(argv)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

/// Simulates a 3x3 separable panel into `dir`; returns (panel, stations).
fn separable_inputs(dir: &Path, n: usize) -> (PathBuf, PathBuf) {
    let spec = write(
        dir,
        "sim.json",
        &format!(
            r#"{{"kind":"separable","n":{n},"seed":11,"stations":{{"grid":{{"nx":3,"ny":3,"spacing":1.0}}}},
               "spatial":{{"family":"exponential","range":2.0}},"rho":0.4,"nugget":0.1}}"#
        ),
    );
    let panel = dir.join("panel.csv");
    let stations = dir.join("stations.csv");
    let code = run_args(&[
        "simulate",
        "--spec",
        p(&spec),
        "--out",
        p(&panel),
        "--stations-out",
        p(&stations),
    ]);
    assert_eq!(code, 0);
    (panel, stations)
}

fn write_panel(dir: &Path, panel: &Panel) -> (PathBuf, PathBuf) {
    let pp = dir.join("panel.csv");
    let sp = dir.join("stations.csv");
    stfreq::io::write_panel(panel, fs::File::create(&pp).unwrap(), &pp).unwrap();
    stfreq::io::write_stations(panel.stations(), fs::File::create(&sp).unwrap(), &sp).unwrap();
    (pp, sp)
}

#[test]
fn fv_writes_one_table_per_lag_and_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let (panel, stations) = separable_inputs(dir.path(), 64);
    let out = dir.path().join("out");
    let code = run_args(&[
        "fv",
        "--panel",
        p(&panel),
        "--stations",
        p(&stations),
        "--h",
        "1,0",
        "--h",
        "2,0",
        "--delta",
        "0.1",
        "--out-dir",
        p(&out),
    ]);
    assert_eq!(code, 0);
    let table = fs::read_to_string(out.join("fv_h1.0.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("omega,raw,smoothed,var"));
    assert_eq!(lines.count(), 64);
    assert!(out.join("fv_h2.0.csv").exists());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("fv_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["rows"].as_array().unwrap().len(), 2);
    assert!(summary["nugget_intercept"].as_f64().unwrap().is_finite());
}

#[test]
fn single_lag_fv_has_no_summary() {
    let dir = tempfile::tempdir().unwrap();
    let (panel, stations) = separable_inputs(dir.path(), 32);
    let out = dir.path().join("out");
    let args = [
        "fv",
        "--panel",
        p(&panel),
        "--stations",
        p(&stations),
        "--h",
        "1,0",
        "--out-dir",
        p(&out),
    ];
    assert_eq!(run_args(&args), 0);
    assert!(out.join("fv_h1.0.csv").exists());
    assert!(!out.join("fv_summary.json").exists());
}

#[test]
fn variogram_table() {
    let dir = tempfile::tempdir().unwrap();
    let (panel, stations) = separable_inputs(dir.path(), 32);
    let out = dir.path().join("v.csv");
    let code = run_args(&[
        "variogram",
        "--panel",
        p(&panel),
        "--stations",
        p(&stations),
        "--h",
        "1,0",
        "--u",
        "0,1,2",
        "--out",
        p(&out),
    ]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "h_norm,u,count,gamma_hat,c_hat");
    assert_eq!(lines.len(), 4);
    // 3x3 grid: 6 directed pairs at h = (1, 0), times n - u time pairs.
    assert!(lines[2].starts_with("1,1,186,"), "{}", lines[2]);
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_stfreq"))
        .args(["fv", "--bogus"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    let help = Command::new(env!("CARGO_BIN_EXE_stfreq"))
        .arg("--help")
        .output()
        .unwrap();
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn bad_input_reports_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let stations = write(dir.path(), "s.csv", "station_id,x1,x2\na,0,0\nb,1,0\n");
    let panel = write(dir.path(), "p.csv", "t,a,b\n1,0.5,1\n2,oops,2\n");
    let out = Command::new(env!("CARGO_BIN_EXE_stfreq"))
        .args([
            "fv",
            "--panel",
            p(&panel),
            "--stations",
            p(&stations),
            "--h",
            "1,0",
        ])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("p.csv:3"), "{err}");
    assert_eq!(
        run_args(&[
            "fv",
            "--panel",
            "/nonexistent.csv",
            "--stations",
            p(&stations),
            "--h",
            "1,0"
        ]),
        2
    );
}

#[test]
fn empty_lag_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let (panel, stations) = separable_inputs(dir.path(), 32);
    let args = [
        "fv",
        "--panel",
        p(&panel),
        "--stations",
        p(&stations),
        "--h",
        "7,0",
        "--out-dir",
        p(dir.path()),
    ];
    assert_eq!(run_args(&args), 4);
}

#[test]
fn indep_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let stations = StationSet::grid(3, 1, 1.0);
    let white = simulate_white(&stations, 121, &[1.0; 3], 5).unwrap();
    let (pp, sp) = write_panel(dir.path(), &white);
    let report = dir.path().join("r.json");
    let code = run_args(&[
        "test-indep",
        "--panel",
        p(&pp),
        "--stations",
        p(&sp),
        "--k",
        "2",
        "--out",
        p(&report),
    ]);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(
        code,
        if json["reject"].as_bool().unwrap() {
            3
        } else {
            0
        }
    );

    // A shared series makes the stations strongly dependent.
    let common = simulate_white(&StationSet::grid(1, 1, 1.0), 121, &[1.0], 6).unwrap();
    let dependent = white.map(|_, t, v| 0.3 * v + common.value(0, t)).unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    let (pp, sp) = write_panel(dir2.path(), &dependent);
    assert_eq!(
        run_args(&[
            "test-indep",
            "--panel",
            p(&pp),
            "--stations",
            p(&sp),
            "--k",
            "2"
        ]),
        3
    );
    assert_eq!(
        run_args(&[
            "test-indep",
            "--panel",
            p(&pp),
            "--stations",
            p(&sp),
            "--k",
            "0"
        ]),
        2
    );
}

const MODEL: &str = r#"{"sigma_eta2":1.0,"nu":1.0,"d":2,"poly":{"a0":1.0,"a1":0.5,"c1":0.5}}"#;

#[test]
fn simulated_periodograms_round_trip_through_fit() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "wp.json",
        &format!(
            r#"{{"kind":"whittle-periodogram","n":128,"seed":3,"pairs_per_lag":10,"lags":[[1,0],[2,0]],"psi":{MODEL}}}"#
        ),
    );
    let pg = dir.path().join("pg.csv");
    assert_eq!(
        run_args(&["simulate", "--spec", p(&spec), "--out", p(&pg)]),
        0
    );
    let start = write(
        dir.path(),
        "model.json",
        &MODEL.replace("\"a1\":0.5", "\"a1\":0.2"),
    );
    let out = dir.path().join("fit.json");
    let code = run_args(&[
        "fit",
        "--periodograms",
        p(&pg),
        "--model",
        p(&start),
        "--out",
        p(&out),
    ]);
    assert_eq!(code, 0);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(
        report["parameters"],
        serde_json::json!(["sigma_eta2", "a1", "c1"])
    );
    assert!(report["converged"].as_bool().unwrap());
    assert_eq!(report["std_errors"].as_array().unwrap().len(), 3);
    let trace = fs::read_to_string(report["trace_path"].as_str().unwrap()).unwrap();
    assert!(trace.starts_with("iteration,criterion\n"));
    assert!(trace.lines().count() > 2);
    assert!((report["model"]["poly"]["a1"].as_f64().unwrap() - 0.5).abs() < 0.3);
}

#[test]
fn fit_from_panel_with_paper_constants() {
    let dir = tempfile::tempdir().unwrap();
    let (panel, stations) = separable_inputs(dir.path(), 128);
    let model = write(dir.path(), "model.json", MODEL);
    let out = dir.path().join("fit.json");
    let code = run_args(&[
        "fit",
        "--panel",
        p(&panel),
        "--stations",
        p(&stations),
        "--h",
        "1,0",
        "--h",
        "0,1",
        "--model",
        p(&model),
        "--out",
        p(&out),
        "--paper-constants",
    ]);
    assert!(code == 0 || code == 4, "exit {code}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["paper_constants"], serde_json::json!(true));
    assert!(report["criterion"].as_f64().unwrap().is_finite());
}

#[test]
fn command_line_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let (panel, stations) = separable_inputs(dir.path(), 32);
    let from_config = dir.path().join("a");
    let from_argv = dir.path().join("b");
    let config = write(
        dir.path(),
        "run.json",
        &serde_json::json!({
            "command": "fv",
            "panel": panel, "stations": stations,
            "h": [[1, 0], "2,0"], "delta": 0.1, "kernel": "daniell",
            "out_dir": from_config,
        })
        .to_string(),
    );
    assert_eq!(
        run_args(&["--config", p(&config), "--out-dir", p(&from_argv)]),
        0
    );
    assert!(from_argv.join("fv_h1.0.csv").exists());
    assert!(from_argv.join("fv_h2.0.csv").exists());
    assert!(!from_config.exists());
    assert_eq!(run_args(&["fv", "--config", p(&config)]), 0);
    assert!(from_config.join("fv_summary.json").exists());
    let missing = dir.path().join("missing.json");
    assert_eq!(run_args(&["--config", p(&missing)]), 2);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let (panel, stations) = separable_inputs(dir.path(), 64);
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("t{threads}"));
        let code = run_args(&[
            "fv",
            "--threads",
            threads,
            "--panel",
            p(&panel),
            "--stations",
            p(&stations),
            "--h",
            "1,0",
            "--h",
            "1,1",
            "--h",
            "2,0",
            "--out-dir",
            p(&out),
        ]);
        assert_eq!(code, 0);
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&out)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (
                    e.file_name().to_string_lossy().into_owned(),
                    fs::read(e.path()).unwrap(),
                )
            })
            .collect();
        files.sort();
        outputs.push(files);
    }
    assert_eq!(outputs[0].len(), 4);
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn simulation_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "w.json",
        r#"{"kind":"white","n":16,"seed":9,"sigma":2.0,"stations":{"grid":{"nx":2,"ny":2,"spacing":1.5}}}"#,
    );
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert_eq!(
        run_args(&["simulate", "--spec", p(&spec), "--out", p(&a)]),
        0
    );
    assert_eq!(
        run_args(&[
            "simulate",
            "--spec",
            p(&spec),
            "--out",
            p(&b),
            "--threads",
            "3"
        ]),
        0
    );
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"kind":"white","n":16,"seed":9,"sigma":-1.0,"stations":{"grid":{"nx":2,"ny":2,"spacing":1}}}"#,
    );
    assert_eq!(
        run_args(&["simulate", "--spec", p(&bad), "--out", p(&a)]),
        2
    );
}

#[test]
fn oracle_check_passes() {
    assert_eq!(run_args(&["oracle-check"]), 0);
}
