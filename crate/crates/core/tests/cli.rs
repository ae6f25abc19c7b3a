use std::path::Path;
use std::process::Command;

use calderon_lab::cli::run;
use serde_json::Value;

fn lab(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["calderon-lab"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn strip_times(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("wall_time_s");
            map.values_mut().for_each(strip_times);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_times),
        _ => {}
    }
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(lab(&["disc", "--bogus"]).0, 2);
    assert_eq!(lab(&["conformal", "--grid", "12"]).0, 2);
    assert_eq!(lab(&["indexsets", "--n", "0"]).0, 2);
    assert_eq!(lab(&["symbols", "--tol", "-1"]).0, 2);
    assert_eq!(lab(&["nosuch"]).0, 2);
}

#[test]
fn help_exits_0() {
    let (code, out, _) = lab(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("conformal"));
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let target = blocker.join("report.json");
    let (code, _, _) = lab(&["indexsets", "--out", target.to_str().unwrap()]);
    assert_eq!(code, 3);
}

#[test]
fn tight_tolerance_fails_with_exit_1() {
    let (code, out, _) = lab(&["symbols", "--tol", "1e-300", "--suite-filter", "gamma"]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("FAIL"));
}

#[test]
fn index_sets_pass() {
    let (code, out, _) = lab(&["indexsets", "--n", "2"]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn report_schema_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let (code, out, _) = lab(&["disc", "--modes", "16", "--seed", "11", "--out", p.to_str().unwrap()]);
        assert_eq!(code, 0, "{out}");
    }
    let (mut ja, mut jb) = (read_json(&a), read_json(&b));
    assert_eq!(ja["schema"], 1);
    assert_eq!(ja["seed"], 11);
    assert!(ja["summary"]["total"].as_u64().unwrap() > 0);
    let row = &ja["suites"][0]["rows"][0];
    for key in ["id", "computed", "expected", "error", "tolerance", "pass", "wall_time_s"] {
        assert!(row.get(key).is_some(), "missing {key}");
    }
    strip_times(&mut ja);
    strip_times(&mut jb);
    assert_eq!(ja, jb);
}

#[test]
fn kernel_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = lab(&["disc", "--modes", "16", "--csv-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    for name in ["kernel_kkstar.csv", "kernel_bergman.csv"] {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap().split(',').count(), 9);
        let rows: Vec<_> = lines.collect();
        assert_eq!(rows.len(), 100);
        assert!(rows.iter().all(|r| r.split(',').count() == 9));
    }
}

#[test]
fn small_conformal_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let (code, text, _) = lab(&[
        "conformal", "--grid", "16", "--band", "1", "--amplitude", "0.02",
        "--suite-filter", "covariance", "--csv-dir", dir.path().to_str().unwrap(),
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{text}");
    let j = read_json(&out);
    assert_eq!(j["summary"]["failed"], 0);
    assert!(dir.path().join("curvature.csv").exists());
}

#[test]
fn binary_reports_exit_code() {
    let status = Command::new(env!("CARGO_BIN_EXE_calderon-lab"))
        .args(["indexsets", "--n", "3"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&status.stdout).contains("indexsets"));
    let bad = Command::new(env!("CARGO_BIN_EXE_calderon-lab")).arg("--grid").arg("7").arg("all").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
