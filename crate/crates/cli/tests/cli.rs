use std::path::Path;
use std::process::{Command, Output};

use pollbench_core::JobInstance;

fn pollbench(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pollbench"))
        .args(args)
        .current_dir(dir)
        .env("POLLBENCH_WORKERS", "2")
        .output()
        .unwrap()
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = pollbench(args, dir);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn gen_writes_instance_and_bounds() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["gen", "longest-queue", "--n", "2", "--p", "3", "--tau", "1", "--out", "c2.json"], dir.path());
    let text = std::fs::read_to_string(dir.path().join("c2.json")).unwrap();
    let instance = JobInstance::from_json(&text).unwrap();
    assert_eq!(instance.n(), 3);
    assert_eq!(instance.to_json() + "\n", text);
    let bounds: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("c2.bounds.json")).unwrap()).unwrap();
    assert_eq!(bounds["online_bound"], "14/1");
    assert_eq!(bounds["offline_bound"], "7/1");
}

#[test]
fn random_gen_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gen", "random", "--seed", "7", "--n", "6", "--k", "3"];
    assert_eq!(ok(&args, dir.path()), ok(&args, dir.path()));
}

#[test]
fn regime_violation_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = pollbench(&["gen", "cyclic-tightness", "--k", "2", "--gamma", "3"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("regime"));
}

#[test]
fn run_limited_instance() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["gen", "limited-setups", "--k", "2", "--n", "2", "--l", "1", "--tau", "1", "--out", "c1.json"], dir.path());
    let csv = ok(
        &[
            "run",
            "--instance",
            "c1.json",
            "--policy",
            r#"{"family":"l_limited","l":1}"#,
            "--policy",
            r#"{"family":"cyclic_exhaustive"}"#,
            "--benchmark",
            "constructed",
        ],
        dir.path(),
    );
    let mut rows = csv::Reader::from_reader(csv.as_bytes());
    let totals: Vec<String> = rows.records().map(|r| r.unwrap()[2].to_string()).collect();
    assert_eq!(totals, ["20/1", "16/1"]);
}

#[test]
fn run_single_job_against_srpt() {
    let dir = tempfile::tempdir().unwrap();
    let csv = ok(
        &[
            "run",
            "--family",
            "single-job",
            "--theta",
            "2",
            "--policy",
            r#"{"family":"one_machine"}"#,
            "--policy",
            r#"{"family":"gipp"}"#,
            "--benchmark",
            "srpt",
        ],
        dir.path(),
    );
    let mut rows = csv::Reader::from_reader(csv.as_bytes());
    for r in rows.records() {
        let r = r.unwrap();
        assert_eq!((&r[5], &r[6], &r[9]), ("4", "1", "true"));
    }
}

#[test]
fn sweep_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{
        "source": {"kind": "family", "family": "longest-queue", "params": {"tau": "1"}},
        "policies": [{"family": "slq"}],
        "benchmark": "constructed",
        "output": "sweep.csv",
        "sweep": {"parameters": ["n", "p"], "values": ["10", "100", "1000"]}
    }"#;
    std::fs::write(dir.path().join("config.json"), config).unwrap();
    ok(&["sweep", "--config", "config.json"], dir.path());
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut rows = csv::Reader::from_reader(csv.as_bytes());
    let ratios: Vec<f64> = rows.records().map(|r| r.unwrap()[9].parse().unwrap()).collect();
    assert!(ratios.windows(2).all(|w| w[0] < w[1]), "{ratios:?}");
}

#[test]
fn brute_force_limit_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let out = pollbench(&["run", "--family", "random", "--n", "12", "--max-n", "10"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("brute force is limited"));
}
