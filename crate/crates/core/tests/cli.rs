use std::process::{Command, Output};

use finsler_core::report::VerificationReport;

fn finsler(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finsler"))
        .args(args)
        .output()
        .expect("spawn finsler")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn verify_funk_half() {
    let o = finsler(&["verify", "--metric", "funk_half", "--dim", "3", "--samples", "50", "--seed", "42", "--tol", "1e-6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("funk_half: constant(-1.0000"), "{}", stdout(&o));
}

#[test]
fn beltrami_flat_numata() {
    let o = finsler(&["beltrami", "--pair", "flat,numata", "--dim", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("base constant(0.0"), "{out}");
    assert!(out.contains("target scalar_nonconstant"), "{out}");
    assert!(out.contains("hamel false"), "{out}");
}

#[test]
fn eval_euclidean_is_flat() {
    let o = finsler(&["--format", "json", "eval", "--metric", "euclidean", "--point", "0,0,0.5;1,0,0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for key in ["jacobi", "w0", "weyl"] {
        let zero = v[key]
            .as_array()
            .unwrap()
            .iter()
            .flat_map(|r| r.as_array().unwrap())
            .all(|c| c.as_f64() == Some(0.0));
        assert!(zero, "{key}: {}", v[key]);
    }
    assert_eq!(v["f"].as_f64(), Some(1.0));
}

#[test]
fn list_names_catalog() {
    let o = finsler(&["list"]);
    assert_eq!(o.status.code(), Some(0));
    for id in finsler_core::catalog::ids() {
        assert!(stdout(&o).contains(id));
    }
}

#[test]
fn unknown_metric_is_usage_error() {
    let o = finsler(&["verify", "--metric", "randers"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("known metrics: euclidean"), "{}", stderr(&o));
}

#[test]
fn invalid_points_are_usage_errors() {
    for point in ["0,0,0;0,0,0", "0.9,0.9,0;1,0,0", "0,0;1,0,0", "a;b"] {
        let o = finsler(&["eval", "--metric", "funk_half", "--point", point]);
        assert_eq!(o.status.code(), Some(2), "{point}: {}", stderr(&o));
    }
    let o = finsler(&["verify"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failing_checks_exit_one() {
    // the Numata metric is not of constant curvature, so its verdict check fails against a zero tolerance
    let o = finsler(&["verify", "--metric", "numata", "--samples", "10", "--tol", "0"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stdout(&o).contains("overall: FAIL"));
}

#[test]
fn unrelated_pair_fails_precondition() {
    let o = finsler(&["beltrami", "--pair", "flat,klein_conformal", "--samples", "10"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn json_is_deterministic_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let o = finsler(&[
            "--format",
            "json",
            "--out",
            path.to_str().unwrap(),
            "verify",
            "--metric",
            "funk_unit",
            "--samples",
            "12",
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let report = VerificationReport::read(&a).unwrap();
    assert!(report.overall);
    assert_eq!(report.dimension, 3);
    assert_eq!(report.to_json().unwrap().trim_end(), text.trim_end());
}
