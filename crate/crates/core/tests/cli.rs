use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use ncortho::linalg::real;
use ncortho::sample;
use ncortho::MomentFunctional;

fn run(args: &[&str]) -> (Output, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_ncortho")).args(args).output().unwrap();
    let report = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out, report)
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn gaussian(dir: &Path) -> String {
    let moments = [1.0, 0.0, 1.0, 0.0, 3.0, 0.0, 15.0, 0.0, 105.0].map(real);
    write(dir, "gauss.json", &MomentFunctional::univariate(&moments).unwrap().to_json().unwrap())
}

fn metric(report: &Value, name: &str) -> f64 {
    report["metrics"][name].as_f64().unwrap_or_else(|| panic!("missing metric {name}: {report}"))
}

#[test]
fn orthopoly_routes_agree() {
    let dir = tempfile::tempdir().unwrap();
    let f = sample::representation_functional(&mut sample::rng(4), 2, 8, 4).unwrap();
    let path = write(dir.path(), "rep.json", &f.to_json().unwrap());
    for method in ["cholesky", "determinant"] {
        let (out, report) = run(&["orthopoly", "--moments", &path, "--level", "2", "--method", method]);
        assert!(out.status.success(), "{method}: {report}");
        assert_eq!(report["status"], "ok");
        assert!(metric(&report, "orthonormality_residual") < 1e-9);
    }
}

#[test]
fn recurrence_roundtrip_and_favard() {
    let dir = tempfile::tempdir().unwrap();
    let moments = gaussian(dir.path());
    let coeffs = dir.path().join("coeffs.json").display().to_string();
    let (out, report) = run(&["recurrence", "--moments", &moments, "--levels", "4", "--out", &coeffs, "--roundtrip"]);
    assert!(out.status.success(), "{report}");
    assert!(metric(&report, "roundtrip_moment_error") < 1e-8);

    let (out, report) = run(&["favard", "--coeffs", &coeffs, "--levels", "4", "--moments", &moments]);
    assert!(out.status.success(), "{report}");
    assert!(metric(&report, "roundtrip_moment_error") < 1e-8);

    let (out, report) = run(&["jacobi", "--coeffs", &coeffs, "--truncate", "3", "--word", "1.1.1.1"]);
    assert!(out.status.success(), "{report}");
    assert!((metric(&report, "moment_re") - 3.0).abs() < 1e-10);
}

#[test]
fn hamburger_rejects_negative_variance() {
    let dir = tempfile::tempdir().unwrap();
    let bad = MomentFunctional::univariate(&[1.0, 0.0, -1.0].map(real)).unwrap();
    let path = write(dir.path(), "bad.json", &bad.to_json().unwrap());
    let (out, report) = run(&["hamburger", "--moments", &path, "--level", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report["details"]["answer"], "no");
    assert_eq!(report["details"]["certificate_word"], "1");
}

#[test]
fn kernel_operations_with_random_points() {
    let (out, report) = run(&["kernel", "--op", "szego-ball", "--seed", "3", "--dim", "2"]);
    assert!(out.status.success(), "{report}");
    assert!(metric(&report, "tail_bound") <= 1e-10);

    let (out, report) = run(&["kernel", "--op", "cayley", "--seed", "5", "--generators", "3"]);
    assert!(out.status.success(), "{report}");
    assert!(metric(&report, "roundtrip_error") < 1e-10);

    let (out, report) = run(&["kernel", "--op", "separate", "--word", "2.1.1"]);
    assert!(out.status.success(), "{report}");
    assert_eq!(metric(&report, "stacked_rank"), metric(&report, "dimension"));
}

#[test]
fn input_errors_exit_with_code_two() {
    let (out, _) = run(&["orthopoly", "--moments", "/nonexistent/file.json", "--level", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "garbage.json", "{not json");
    let (out, _) = run(&["orthopoly", "--moments", &path, "--level", "1"]);
    assert_eq!(out.status.code(), Some(2));
}
