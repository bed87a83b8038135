#[path = "../../core/tests/support/schema.rs"]
mod schema;

use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use serde_json::{json, Value};

fn csalsa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_csalsa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write_json(path: &Path, v: &Value) {
    std::fs::write(path, serde_json::to_string_pretty(v).unwrap()).unwrap();
}

fn report_schema() -> Value {
    serde_json::from_str(include_str!("../../core/schemas/report.schema.json")).unwrap()
}

fn config_schema() -> Value {
    serde_json::from_str(include_str!("../schemas/run-config.schema.json")).unwrap()
}

fn untimed(mut report: Value) -> Value {
    report.as_object_mut().unwrap().remove("elapsed_seconds");
    report
}

fn small_mri_config(dir: &Path, name: &str, extra_solver: Value) -> std::path::PathBuf {
    let mut solver = json!({ "max_iters": 10 });
    solver
        .as_object_mut()
        .unwrap()
        .extend(extra_solver.as_object().unwrap().clone());
    let cfg = json!({
        "schema_version": 1,
        "experiment": {
            "name": name,
            "problem": "mri",
            "noise_variance": 0.0,
            "regularizer": { "kind": "tv_iso" },
            "eps_rel_floor": 1e-6,
            "image": { "kind": "shepp_logan", "size": 32 },
            "mask": { "kind": "radial_lines", "count": 8 }
        },
        "solver": solver,
        "outputs": { "report": dir.join(format!("{name}.report.json")) }
    });
    let path = dir.join(format!("{name}.json"));
    write_json(&path, &cfg);
    path
}

#[test]
fn flags_and_config_agree() {
    let dir = tempfile::tempdir().unwrap();
    let by_flags = dir.path().join("flags.json");
    let out = csalsa(&[
        "deblur",
        "--synthetic",
        "32",
        "--blur",
        "gaussian",
        "--levels",
        "2",
        "--max-iters",
        "15",
        "--report",
        by_flags.to_str().unwrap(),
    ]);
    assert!(matches!(code(&out), 0 | 2), "{}", stderr(&out));
    let flags_report = read_json(&by_flags);
    schema::validate(&report_schema(), &flags_report).unwrap();

    let by_config = dir.path().join("config-report.json");
    let cfg = json!({
        "schema_version": 1,
        "experiment": flags_report["spec"],
        "solver": { "max_iters": 15 },
        "outputs": { "report": by_config },
    });
    schema::validate(&config_schema(), &cfg).unwrap();
    let cfg_path = dir.path().join("run.json");
    write_json(&cfg_path, &cfg);
    let out = csalsa(&["solve", cfg_path.to_str().unwrap()]);
    assert!(matches!(code(&out), 0 | 2), "{}", stderr(&out));
    assert_eq!(untimed(read_json(&by_config)), untimed(flags_report));
}

#[test]
fn misspelled_config_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let path = small_mri_config(dir.path(), "typo", json!({ "epsilonn": 0.5 }));
    assert!(schema::validate(&config_schema(), &read_json(&path)).is_err());
    let out = csalsa(&["solve", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("epsilonn"), "{}", stderr(&out));
}

#[test]
fn bad_arguments_exit_1() {
    assert_eq!(code(&csalsa(&["mri", "--size", "31"])), 1);
    assert_eq!(code(&csalsa(&["deblur", "--max-iters", "5"])), 1);
    assert_eq!(
        code(&csalsa(&["deblur", "--image", "/nonexistent/x.pgm"])),
        1
    );
    assert_eq!(code(&csalsa(&["frobnicate"])), 1);
}

#[test]
fn zero_budget_reports_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out = csalsa(&[
        "deblur",
        "--synthetic",
        "32",
        "--levels",
        "2",
        "--max-iters",
        "0",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    let r = read_json(&report);
    assert_eq!(r["iterations"], json!(0));
    assert_eq!(r["status"], json!("max-iters, infeasible at tolerance"));
}

#[test]
fn zero_epsilon_config_runs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bp.json");
    let mut cfg = read_json(&small_mri_config(dir.path(), "bp", json!({})));
    cfg["experiment"]["epsilon"] = json!(0.0);
    write_json(&path, &cfg);
    let out = csalsa(&["solve", path.to_str().unwrap()]);
    assert!(matches!(code(&out), 0 | 2), "{}", stderr(&out));
    assert_eq!(
        read_json(&dir.path().join("bp.report.json"))["epsilon"],
        json!(0.0)
    );
}

#[test]
fn single_line_mask_runs() {
    let out = csalsa(&["mri", "--size", "32", "--lines", "1", "--max-iters", "5"]);
    assert!(matches!(code(&out), 0 | 2), "{}", stderr(&out));
}

#[test]
fn json_summary_is_one_line() {
    let out = csalsa(&[
        "mri",
        "--size",
        "32",
        "--lines",
        "8",
        "--max-iters",
        "5",
        "--json",
    ]);
    assert!(matches!(code(&out), 0 | 2), "{}", stderr(&out));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 1);
    let v: Value = serde_json::from_str(stdout.trim()).unwrap();
    assert_eq!(v["iterations"], json!(5));
}

#[test]
fn batch_runs_every_config() {
    let dir = tempfile::tempdir().unwrap();
    let a = small_mri_config(dir.path(), "a", json!({}));
    let b = small_mri_config(dir.path(), "b", json!({ "mu": 5.0 }));
    let out = csalsa(&[
        "batch",
        "--jobs",
        "2",
        "--json",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
    ]);
    assert!(matches!(code(&out), 0 | 2), "{}", stderr(&out));
    let summaries: Value = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<_> = summaries
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["name"].clone())
        .collect();
    assert_eq!(names, [json!("a"), json!("b")]);
    for name in ["a", "b"] {
        let r = read_json(&dir.path().join(format!("{name}.report.json")));
        schema::validate(&report_schema(), &r).unwrap();
    }
}

#[test]
fn selftest_passes_quickly() {
    let start = Instant::now();
    let out = csalsa(&["selftest", "--quick"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(!stderr(&out).contains("FAIL"));
    assert!(start.elapsed() < Duration::from_secs(120));
}

#[test]
fn broken_adjoint_fails_selftest() {
    let out = csalsa(&["selftest", "--quick", "--perturb-adjoint", "1e-3"]);
    assert_eq!(code(&out), 1);
    let err = stderr(&out);
    assert_eq!(
        err.lines().filter(|l| l.starts_with("FAIL")).count(),
        1,
        "{err}"
    );
}
