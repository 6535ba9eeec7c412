use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL: &str = r#"{
  "phase1_budget": 2000,
  "saturation_window": 500,
  "phase2_budget": 500,
  "trials": 2,
  "trial_seeds": [1, 2]
}"#;

fn mutafuzz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mutafuzz"))
        .args(args)
        .env_remove("MUTAFUZZ_RUN_DIR")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = mutafuzz(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    mutafuzz(args).status.code().unwrap()
}

fn small_config(dir: &Path) -> String {
    let p = dir.join("small.json");
    fs::write(&p, SMALL).unwrap();
    p.to_string_lossy().into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn full_run(tmp: &TempDir, name: &str) -> std::path::PathBuf {
    let cfg = small_config(tmp.path());
    let run = tmp.path().join(name);
    ok(&["gen", "demo", "--config", &cfg, s(&run)]);
    ok(&["run", s(&run), "--jobs", "2"]);
    ok(&["analyze", s(&run)]);
    ok(&["report", s(&run)]);
    run
}

#[test]
fn full_lifecycle_on_demo() {
    let tmp = TempDir::new().unwrap();
    let run = full_run(&tmp, "run");
    for f in [
        "config.json",
        "target.mini",
        "mutants.json",
        "manifest.json",
        "phase1.json",
        "supermutants.json",
        "logs/index.json",
        "verdicts.json",
        "matrix.csv",
        "curves.csv",
        "report.json",
        "report.md",
    ] {
        assert!(run.join(f).is_file(), "missing {f}");
    }
    assert!(run.join("seed/0000.bin").is_file());

    let verdicts: serde_json::Value = serde_json::from_slice(&fs::read(run.join("verdicts.json")).unwrap()).unwrap();
    let report: serde_json::Value = serde_json::from_slice(&fs::read(run.join("report.json")).unwrap()).unwrap();
    let mutants: Vec<serde_json::Value> = serde_json::from_slice(&fs::read(run.join("mutants.json")).unwrap()).unwrap();
    assert_eq!(verdicts["total"].as_u64().unwrap() as usize, mutants.len());
    assert_eq!(report["total"], verdicts["total"]);
    let counted: u64 = verdicts["counts"].as_object().unwrap().values().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(counted as usize, mutants.len());

    let md = fs::read_to_string(run.join("report.md")).unwrap();
    assert!(md.contains(&format!("{}", mutants.len())));
}

#[test]
fn curves_are_sorted() {
    let tmp = TempDir::new().unwrap();
    let run = full_run(&tmp, "run");
    let text = fs::read_to_string(run.join("curves.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("fuzzer,trial,vtime"));
    let rows: Vec<(String, u64, u64)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert!(rows.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn rerunning_is_a_no_op_and_analysis_is_stable() {
    let tmp = TempDir::new().unwrap();
    let run = full_run(&tmp, "run");
    let before = fs::read(run.join("verdicts.json")).unwrap();
    let out = ok(&["run", s(&run)]);
    assert!(out.contains("already complete"));
    assert_eq!(fs::read(run.join("verdicts.json")).unwrap(), before);

    let snapshot = |f: &str| fs::read(run.join(f)).unwrap();
    let first: Vec<Vec<u8>> = ["matrix.csv", "curves.csv", "report.json"].iter().map(|f| snapshot(f)).collect();
    ok(&["analyze", s(&run)]);
    let second: Vec<Vec<u8>> = ["matrix.csv", "curves.csv", "report.json"].iter().map(|f| snapshot(f)).collect();
    assert_eq!(first, second);
}

#[test]
fn gen_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(&["gen", "cache", s(&a)]);
    ok(&["gen", "cache", s(&b)]);
    for f in ["config.json", "mutants.json", "target.mini"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn gen_applies_oracle_and_seed_override() {
    let tmp = TempDir::new().unwrap();
    let run = tmp.path().join("r");
    ok(&["--oracle", "diff", "--seed-override", "9", "gen", "demo", s(&run)]);
    let cfg: serde_json::Value = serde_json::from_slice(&fs::read(run.join("config.json")).unwrap()).unwrap();
    assert_eq!(cfg["oracle"]["kind"], "differential");
    assert_ne!(cfg["trial_seeds"], serde_json::json!([1, 2, 3, 4, 5]));
    assert_eq!(code(&["--oracle", "crash", "run", s(&run)]), 2);
}

#[test]
fn bad_inputs_exit_with_2() {
    let tmp = TempDir::new().unwrap();
    let bad_op = tmp.path().join("bad.json");
    fs::write(&bad_op, r#"{"operators": ["AOR", "XYZ"]}"#).unwrap();
    let out = mutafuzz(&["gen", "demo", "--config", s(&bad_op), s(&tmp.path().join("r1"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("SDL"));

    let broken = tmp.path().join("broken.mini");
    fs::write(&broken, "fn main() { x = ; }").unwrap();
    assert_eq!(code(&["gen", s(&broken), s(&tmp.path().join("r2"))]), 2);
    assert_eq!(code(&["gen", "no-such-target", s(&tmp.path().join("r3"))]), 2);
}

#[test]
fn damaged_run_dirs_exit_with_3() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&["run", s(&tmp.path().join("missing"))]), 3);

    let run = tmp.path().join("r");
    ok(&["gen", "demo", "--config", &small_config(tmp.path()), s(&run)]);
    fs::remove_file(run.join("mutants.json")).unwrap();
    assert_eq!(code(&["run", s(&run)]), 3);

    let run = tmp.path().join("edited");
    ok(&["gen", "demo", s(&run)]);
    fs::write(run.join("target.mini"), "fn main() { print(1); }").unwrap();
    assert_eq!(code(&["run", s(&run)]), 3);

    let run = tmp.path().join("early");
    ok(&["gen", "demo", s(&run)]);
    assert_eq!(code(&["analyze", s(&run)]), 3);
    assert_eq!(code(&["report", s(&run)]), 3);
}

#[test]
fn run_dir_defaults_to_the_environment() {
    let tmp = TempDir::new().unwrap();
    let run = tmp.path().join("env-run");
    let out = Command::new(env!("CARGO_BIN_EXE_mutafuzz"))
        .args(["gen", "demo"])
        .env("MUTAFUZZ_RUN_DIR", &run)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(run.join("mutants.json").is_file());
}
