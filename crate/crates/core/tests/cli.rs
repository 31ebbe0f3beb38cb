//! End-to-end runs of the `crfolio` binary: exit codes, report layout and
//! determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_crfolio"));
    cmd.env_remove("CRFOLIO_THREADS");
    cmd
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(task: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .arg(task)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

const HOLOMORPHIC: &str = r#"{
  "schema": 1,
  "task": "verdict",
  "family": { "builder": "translated_circles",
              "params": { "rho": 1, "center_path": [[0, 0], [3, 0]], "resolution": 64 } },
  "function": { "name": "z_sq" },
  "grid": { "circle_points": 64 }
}"#;

#[test]
fn holomorphic_verdict_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "v.json", HOLOMORPHIC);
    let out = dir.path().join("out");
    let o = run("verdict", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["verdict"]["kind"], "HOLOMORPHIC_CONFIRMED");
    for key in ["meta", "config_echo", "evidence"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert_eq!(r["meta"]["seed"], 0);
    assert_eq!(r["config_echo"]["schema"], 1);
}

#[test]
fn reports_are_deterministic_outside_meta() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "v.json", HOLOMORPHIC);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run("verdict", &cfg, &a, &["--seed", "5"]).status.code(), Some(0));
    assert_eq!(run("verdict", &cfg, &b, &["--seed", "5"]).status.code(), Some(0));
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("meta");
        serde_json::to_string(&v).unwrap()
    };
    let (ra, rb) = (report(&a), report(&b));
    assert_eq!(ra["meta"]["seed"], 5);
    assert_eq!(strip(ra), strip(rb));
}

#[test]
fn malformed_family_exits_two_and_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{
  "schema": 1,
  "task": "verdict",
  "family": { "builder": "rotating_circles",
              "params": { "R": "one", "r": 2 } },
  "function": { "name": "z_sq" }
}"#;
    let cfg = write_config(dir.path(), "bad.json", text);
    let o = run("verdict", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("family.params.R"), "{err}");
    assert!(err.contains("line 5"), "{err}");
}

#[test]
fn unknown_builder_and_bad_tolerance_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_config(
        dir.path(),
        "u.json",
        r#"{"schema": 1, "task": "homology", "family": {"builder": "spirals", "params": {}}}"#,
    );
    let o = run("homology", &unknown, &dir.path().join("o1"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("family"));

    let negative = write_config(
        dir.path(),
        "n.json",
        r#"{
  "schema": 1,
  "task": "verdict",
  "family": { "builder": "rotating_circles", "params": { "R": 1, "r": 2, "resolution": 32 } },
  "function": { "name": "z_sq" },
  "tolerances": { "dbar": -1 }
}"#,
    );
    let o = run("verdict", &negative, &dir.path().join("o2"), &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("tolerances.dbar") && err.contains("line 6"), "{err}");
}

#[test]
fn task_must_match_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "v.json", HOLOMORPHIC);
    let o = run("homology", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn task_errors_exit_one_with_structured_error() {
    let dir = tempfile::tempdir().unwrap();
    // conj(z) has no holomorphic extension, so there is no J to compute
    let text = r#"{
  "schema": 1,
  "task": "jacobian",
  "family": { "builder": "translated_circles",
              "params": { "rho": 1, "center_path": [[0, 0], [3, 0]], "resolution": 32 } },
  "function": { "name": "zbar" },
  "grid": { "circle_points": 64 }
}"#;
    let cfg = write_config(dir.path(), "j.json", text);
    let out = dir.path().join("out");
    let o = run("jacobian", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["error"]["kind"], "no_extension");
    assert!(r["evidence"].is_null());
}

#[test]
fn counterexamples_pass() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"schema": 1, "task": "counterexamples", "grid": {"resolution": 64}}"#,
    );
    let out = dir.path().join("out");
    let o = run("counterexamples", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["evidence"]["passed"], true);
    assert_eq!(r["evidence"]["cases"].as_array().unwrap().len(), 3);
}

#[test]
fn csv_exports_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{
  "schema": 1,
  "task": "fibers",
  "family": { "builder": "rotating_circles", "params": { "R": 1, "r": 2, "resolution": 64 } },
  "probes": { "points": [[0, 0], [2, 0]] }
}"#;
    let cfg = write_config(dir.path(), "f.json", text);
    let out = dir.path().join("out");
    assert_eq!(run("fibers", &cfg, &out, &[]).status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("fibers_000.csv")).unwrap();
    assert!(csv.starts_with("fiber,t,re,im\n"));
    assert!(csv.lines().count() > 100);
    let r = report(&out);
    assert_eq!(r["evidence"]["probes"][1]["degree"], 0);
    assert_eq!(r["evidence"]["probes"][1]["preimages"], 2);
}

#[test]
fn list_catalog_is_stable() {
    let a = bin().arg("list_catalog").output().unwrap();
    let b = bin().arg("list_catalog").output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.lines().any(|l| l.contains("rotating_circles") && l.contains("§2.3")));
    assert!(text.lines().any(|l| l.contains("hopf_discs") && l.contains("§2.3 Hopf foliation")));
}

#[test]
fn thread_cap_is_validated_and_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "v.json", HOLOMORPHIC);
    let bad = bin()
        .env("CRFOLIO_THREADS", "zero")
        .args(["verdict", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("x"))
        .output()
        .unwrap();
    assert_ne!(bad.status.code(), Some(0));
    let out = dir.path().join("one");
    let ok = bin()
        .env("CRFOLIO_THREADS", "1")
        .args(["verdict", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(report(&out)["meta"]["threads"], 1);
}
