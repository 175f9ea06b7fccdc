//! End-to-end tests of the `holosem` binary: exit codes, determinism of
//! the report files, and flag behaviour.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_holosem")
}

fn write_spec(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("spec.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

const SMALL_SPEC: &str = r#"
seed = 0

[instance]
kind = "two-point"
rate = 1.0

[grids]
time_points = 60
restarts = 2

[[tasks]]
kind = "validate"

[[tasks]]
kind = "kato"

[[tasks]]
kind = "bounds-table"
q_list = [2.0]
m_list = [1.0]
"#;

#[test]
fn successful_run_exits_zero_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), SMALL_SPEC);
    let out_dir = dir.path().join("out");
    let out = run(&["--spec", spec.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("report.csv")).unwrap();
    assert!(csv.starts_with("task,name,inputs,value"));
    assert!(csv.contains("kato,eps"));
    let json = std::fs::read_to_string(out_dir.join("report.json")).unwrap();
    assert!(json.contains("\"instance\": \"two-point(rate=1)\""));
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), SMALL_SPEC);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run(&["--spec", spec.to_str().unwrap(), "--out", a.to_str().unwrap()]).status.success());
    assert!(run(&["--spec", spec.to_str().unwrap(), "--out", b.to_str().unwrap()]).status.success());
    for file in ["report.csv", "report.json"] {
        let left = std::fs::read(a.join(file)).unwrap();
        let right = std::fs::read(b.join(file)).unwrap();
        assert_eq!(left, right, "{file} differs between identical runs");
    }
}

#[test]
fn jobs_flag_does_not_change_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), SMALL_SPEC);
    let (a, b) = (dir.path().join("seq"), dir.path().join("par"));
    assert!(run(&["--spec", spec.to_str().unwrap(), "--out", a.to_str().unwrap()]).status.success());
    assert!(run(&[
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        b.to_str().unwrap(),
        "--jobs",
        "4"
    ])
    .status
    .success());
    assert_eq!(
        std::fs::read(a.join("report.csv")).unwrap(),
        std::fs::read(b.join("report.csv")).unwrap()
    );
}

#[test]
fn malformed_spec_exits_two_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "[instance]\nkind = \"two-point\"\nbogus = true\n");
    let out = run(&["--spec", spec.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line"), "stderr should carry a position: {err}");
}

#[test]
fn missing_spec_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["--spec", "/nonexistent/spec.toml", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn impossible_tolerance_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), SMALL_SPEC);
    let out = run(&[
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
        "--tol",
        "1e-30",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("check failed"), "stderr: {err}");
}

#[test]
fn unreachable_quadrature_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        r#"
[instance]
kind = "two-point"

[tolerances]
quad = 1e-18
contour = 1e-10

[[tasks]]
kind = "subordination"
t = [1.0]
"#,
    );
    let out = run(&["--spec", spec.to_str().unwrap(), "--out", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn fail_fast_stops_after_first_failure() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), SMALL_SPEC);
    let out_dir = dir.path().join("out");
    let out = run(&[
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--tol",
        "1e-30",
        "--fail-fast",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let csv = std::fs::read_to_string(out_dir.join("report.csv")).unwrap();
    // validate fails immediately; kato and bounds-table never run
    assert!(csv.contains("validate"));
    assert!(!csv.contains("bounds-table"));
}

#[test]
fn list_tasks_prints_all_names() {
    let out = run(&["--list-tasks"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in holosem_cli::TASK_NAMES {
        assert!(text.contains(name), "missing task {name}");
    }
}

#[test]
fn seed_override_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), SMALL_SPEC);
    let out_dir = dir.path().join("out");
    assert!(run(&[
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--seed",
        "42"
    ])
    .status
    .success());
    let json = std::fs::read_to_string(out_dir.join("report.json")).unwrap();
    assert!(json.contains("\"seed\": 42"));
}
