use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cyclecensus::report::CSV_HEADER;
use cyclecensus::ExperimentReport;
use tempfile::TempDir;

const TANGENCY: &str = r#"{
  "experiment": "tangency",
  "ensemble": {"kind": "bargmann_fock", "truncation": 24},
  "r_list": [0.5, 1.0],
  "trials": 12,
  "master_seed": 99
}"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cyclecensus"));
    c.env_remove("CYCLECENSUS_WORKERS");
    c
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

#[test]
fn csv_to_file() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "t.json", TANGENCY);
    let out = dir.path().join("t.csv");
    let o = run(&[
        "tangency",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER.join(","));
    assert_eq!(lines.len(), 3);
    let cells: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(cells.len(), CSV_HEADER.len());
    assert_eq!(cells[0], "tangency");
    assert_eq!(cells[1], "bargmann_fock");
    // d, rho, gamma and epsilon do not apply
    assert_eq!(&cells[2..6], &["", "", "", ""]);
    assert_eq!(cells[7], "12");
    let theory: f64 = cells[11].parse().unwrap();
    assert_eq!(theory, 2.0 * 2f64.sqrt());
}

#[test]
fn json_reports_are_byte_identical_across_runs_and_workers() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "t.json", TANGENCY);
    let a = run(&[
        "tangency",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "json",
        "--workers",
        "1",
    ]);
    let b = bin()
        .args([
            "tangency",
            "--config",
            cfg.to_str().unwrap(),
            "--format",
            "json",
        ])
        .env("CYCLECENSUS_WORKERS", "3")
        .output()
        .unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let report: ExperimentReport = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report.records.len(), 24);
}

#[test]
fn seed_and_trials_overrides() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "t.json", TANGENCY);
    let o = run(&[
        "tangency",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "json",
        "--seed",
        "5",
        "--trials",
        "3",
    ]);
    assert!(o.status.success());
    let report: ExperimentReport = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report.metadata.config.master_seed, 5);
    assert_eq!(report.records.len(), 6);
    assert!(report.records.iter().all(|r| r.seed.master_seed == 5));
}

#[test]
fn config_errors_exit_with_2() {
    let dir = TempDir::new().unwrap();
    let unknown = write(
        dir.path(),
        "u.json",
        &TANGENCY.replace("\"trials\"", "\"extra\": 1, \"trials\""),
    );
    let good = write(dir.path(), "g.json", TANGENCY);
    let missing = dir.path().join("nope.json");
    let cases: Vec<Vec<&str>> = vec![
        vec!["tangency", "--config", unknown.to_str().unwrap()],
        vec!["x_rho", "--config", good.to_str().unwrap()],
        vec!["tangency", "--config", missing.to_str().unwrap()],
        vec![
            "tangency",
            "--config",
            good.to_str().unwrap(),
            "--trials",
            "0",
        ],
        vec![
            "tangency",
            "--config",
            good.to_str().unwrap(),
            "--workers",
            "0",
        ],
    ];
    for args in cases {
        let o = run(&args);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn unwritable_output_exits_with_3() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "t.json", TANGENCY);
    let out = dir.path().join("missing").join("t.csv");
    let o = run(&[
        "tangency",
        "--config",
        cfg.to_str().unwrap(),
        "--trials",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing"));
}

#[test]
fn wall_time_goes_to_stderr() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "k.json",
        r#"{"experiment":"kac_rice_curve","d_list":[10],"rho":1.0,"trials":1,"master_seed":0}"#,
    );
    let o = run(&["kac_rice_curve", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("finished in"));
    assert!(!String::from_utf8_lossy(&o.stdout).contains("finished"));
}
