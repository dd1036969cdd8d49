//! Command-line behaviour: output, exit codes, store integrity and sweeps.

use std::path::Path;

use loqc::harness::cli::{run, EXIT_AUDIT, EXIT_INFEASIBLE, EXIT_OK, EXIT_USAGE};
use loqc::harness::store::STORE_FILE;

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn loqc(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("loqc").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const CNOT: &str = r#"{"schema": 1, "target": {"weyl": ["pi/2", 0, 0]}, "settings": {"restarts": 6}}"#;

#[test]
fn canon_prints_the_representative() {
    let o = loqc(&["canon", "3pi/4", "0", "0"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert_eq!(o.stdout, "π/4 0 0\n");

    let o = loqc(&["canon", "-pi/2", "pi/8", "0", "--format", "json"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert!(v["c1"].as_f64().unwrap() >= 0.0);
}

#[test]
fn kak_reports_cnot_coordinates() {
    let dir = tempfile::tempdir().unwrap();
    let one = [1.0, 0.0];
    let zero = [0.0, 0.0];
    let rows = serde_json::json!([[one, zero, zero, zero], [zero, one, zero, zero], [zero, zero, zero, one], [zero, zero, one, zero]]);
    let f = write(dir.path(), "cnot.json", &rows.to_string());
    let o = loqc(&["kak", &f]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stdout.contains("canonical: π/2 0 0"), "{}", o.stdout);

    let o = loqc(&["kak", &f, "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert!((v["canonical"]["c1"].as_f64().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-9);

    let bad = write(dir.path(), "bad.json", "[[[1, 0]]]");
    assert_eq!(loqc(&["kak", &bad]).code, EXIT_USAGE);
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(loqc(&["frobnicate"]).code, EXIT_USAGE);
    assert_eq!(loqc(&["optimize"]).code, EXIT_USAGE);
    assert_eq!(loqc(&["canon", "0", "0", "0", "--format", "xml"]).code, EXIT_USAGE);
    assert_eq!(loqc(&["canon", "zero", "0", "0"]).code, EXIT_USAGE);
    assert_eq!(loqc(&["--help"]).code, EXIT_OK);

    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "c.json", r#"{"schema": 1, "target": {"weyl": [0, 0, 0]}, "settings": {"restart": 3}}"#);
    let o = loqc(&["optimize", "--config", &f]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains("settings.restart"), "{}", o.stderr);

    let f = write(dir.path(), "v.json", r#"{"schema": 7, "target": {"weyl": [0, 0, 0]}}"#);
    assert_eq!(loqc(&["optimize", "--config", &f]).code, EXIT_USAGE);
    assert_eq!(loqc(&["optimize", "--config", "/nonexistent/c.json"]).code, EXIT_USAGE);
}

#[test]
fn optimize_verify_and_tamper_detection() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cnot.json", CNOT);
    let store = dir.path().join("store");
    let store = store.to_str().unwrap();

    let o = loqc(&["optimize", "--config", &cfg, "--store", store, "--format", "json"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert!((v["success"].as_f64().unwrap() - 2.0 / 27.0).abs() < 1e-6);

    let o = loqc(&["verify", "--store", store]);
    assert_eq!(o.code, EXIT_OK, "{}{}", o.stdout, o.stderr);
    assert!(o.stdout.starts_with("ok: 1 records"));

    let path = Path::new(store).join(STORE_FILE);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut entry: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    let s = entry["record"]["success"].as_f64().unwrap();
    entry["record"]["success"] = serde_json::json!(s * 1.01);
    std::fs::write(&path, format!("{entry}\n")).unwrap();

    let o = loqc(&["verify", "--store", store]);
    assert_eq!(o.code, EXIT_AUDIT);
    assert!(o.stdout.starts_with("FAIL"), "{}", o.stdout);
}

#[test]
fn infeasible_target_exits_with_two_and_is_stored() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "b.json", r#"{"schema": 1, "target": {"weyl": ["pi/2", "pi/4", 0]}}"#);
    let store = dir.path().join("store");
    let store = store.to_str().unwrap();
    let o = loqc(&["optimize", "--config", &cfg, "--store", store, "--ancilla-photons", "0", "--restarts", "2"]);
    assert_eq!(o.code, EXIT_INFEASIBLE, "{}", o.stderr);
    let text = std::fs::read_to_string(Path::new(store).join(STORE_FILE)).unwrap();
    assert!(text.contains(r#""kind":"infeasible""#), "{text}");
}

#[test]
fn reports_are_reproducible_and_name_missing_records() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cnot.json", CNOT);
    let store = dir.path().join("store");
    let store = store.to_str().unwrap();
    assert_eq!(loqc(&["optimize", "--config", &cfg, "--store", store]).code, EXIT_OK);

    let a = loqc(&["report", "curves", "--store", store]);
    let b = loqc(&["report", "curves", "--store", store]);
    assert_eq!(a.code, EXIT_OK);
    assert_eq!(a.stdout, b.stdout);
    assert!(a.stdout.starts_with("c1,c2,c3,ancilla_photons,family,success,fidelity,record,envelope\n"));
    assert_eq!(a.stdout.lines().count(), 2);

    let t = loqc(&["report", "table", "--store", store]);
    assert_eq!(t.code, EXIT_USAGE);
    assert!(t.stderr.contains("B"), "{}", t.stderr);
}

#[test]
fn sweeps_collapse_equivalent_points_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "line.json",
        r#"{"schema": 1, "sweep": {"line": {"from": ["pi/4", 0, 0], "to": ["3pi/4", 0, 0], "points": 3}}, "settings": {"restarts": 4}}"#,
    );
    let store = dir.path().join("store");
    let store = store.to_str().unwrap();

    let first = loqc(&["sweep", "--config", &cfg, "--store", store]);
    assert_eq!(first.code, EXIT_OK, "{}", first.stderr);
    // 3π/4 is equivalent to π/4, so two points remain
    assert_eq!(first.stdout.lines().count(), 3, "{}", first.stdout);
    let path = Path::new(store).join(STORE_FILE);
    let before = std::fs::read_to_string(&path).unwrap();

    let second = loqc(&["sweep", "--config", &cfg, "--store", store]);
    assert_eq!(second.code, EXIT_OK);
    assert_eq!(second.stdout, first.stdout);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), before);
}
