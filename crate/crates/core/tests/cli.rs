use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use bnplast::bn::generate_network;
use bnplast::rng::seeded_stream;
use tempfile::TempDir;

fn bnplast(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bnplast"))
        .args(args)
        .env_remove("BNPLAST_SEED")
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

const TINY: &str = r#"{
  "n_values": [40],
  "bias_values": [0.21, 0.5],
  "replicas": 2,
  "iterations": 3,
  "steps_per_trial": 50
}"#;

fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else if path.file_name().unwrap() != "manifest.json" {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn smoke_run_is_fast_and_complete() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "smoke.json",
        r#"{"bias_values": [0.21], "replicas": 1, "iterations": 1}"#,
    );
    let out = dir.path().join("out");
    let start = Instant::now();
    let res = bnplast(&["run", "--config", s(&cfg), "--out", s(&out), "--workers", "1"]);
    assert!(res.status.success(), "{}", stderr(&res));
    assert!(start.elapsed() < Duration::from_secs(5));
    for f in ["manifest.json", "summary.csv", "stats.csv", "results/100_0.21_positive_0.csv"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let rows = fs::read_to_string(out.join("results/100_0.21_positive_0.csv")).unwrap();
    assert_eq!(rows.lines().next().unwrap(), "iteration,q,F_trial,accepted,F_best");
    assert_eq!(rows.lines().count(), 2);
}

#[test]
fn runs_are_byte_identical_across_worker_counts() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "tiny.json", TINY);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(bnplast(&["run", "--config", s(&cfg), "--out", s(&a), "--workers", "3"]).status.success());
    assert!(bnplast(&["run", "--config", s(&cfg), "--out", s(&b), "--workers", "1"]).status.success());
    let (ta, tb) = (tree(&a), tree(&b));
    assert_eq!(ta.len(), 4 + 2);
    assert_eq!(ta, tb);
}

#[test]
fn seed_flag_changes_results_and_env_matches_flag() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "tiny.json", TINY);
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    assert!(bnplast(&["run", "--config", s(&cfg), "--out", s(&a), "--seed", "77"]).status.success());
    let env_run = Command::new(env!("CARGO_BIN_EXE_bnplast"))
        .args(["run", "--config", s(&cfg), "--out", s(&b)])
        .env("BNPLAST_SEED", "77")
        .output()
        .unwrap();
    assert!(env_run.status.success());
    assert!(bnplast(&["run", "--config", s(&cfg), "--out", s(&c)]).status.success());
    assert_eq!(tree(&a), tree(&b));
    assert_ne!(tree(&a), tree(&c));
}

#[test]
fn manifest_rerun_reproduces_results() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "tiny.json", TINY);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(bnplast(&["run", "--config", s(&cfg), "--out", s(&a), "--seed", "5", "--reset-pose"]).status.success());
    let manifest = a.join("manifest.json");
    let res = bnplast(&["run", "--manifest", s(&manifest), "--out", s(&b), "--workers", "1"]);
    assert!(res.status.success(), "{}", stderr(&res));
    assert_eq!(tree(&a), tree(&b));
}

#[test]
fn invalid_config_exits_2_with_location() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let unknown = write_config(dir.path(), "unknown.json", "{\n  \"replicas\": 2,\n  \"replicaz\": 3\n}");
    let res = bnplast(&["run", "--config", s(&unknown), "--out", s(&out)]);
    assert_eq!(res.status.code(), Some(2));
    let msg = stderr(&res);
    assert!(msg.contains("replicaz") && msg.contains("line 3"), "{msg}");

    let bad_bias = write_config(dir.path(), "bias.json", r#"{"bias_values": [1.5]}"#);
    let res = bnplast(&["run", "--config", s(&bad_bias), "--out", s(&out)]);
    assert_eq!(res.status.code(), Some(2));

    let small = write_config(dir.path(), "small.json", r#"{"n_values": [20]}"#);
    assert_eq!(bnplast(&["run", "--config", s(&small), "--out", s(&out)]).status.code(), Some(2));
    assert!(!out.exists(), "nothing is written for a rejected config");
}

#[test]
fn io_failures_exit_3() {
    let dir = TempDir::new().unwrap();
    let res = bnplast(&["run", "--config", s(&dir.path().join("absent.json")), "--out", s(&dir.path().join("o"))]);
    assert_eq!(res.status.code(), Some(3));

    // output path blocked by a regular file
    let cfg = write_config(dir.path(), "tiny.json", TINY);
    let blocker = dir.path().join("blocker");
    fs::write(&blocker, "").unwrap();
    let res = bnplast(&["run", "--config", s(&cfg), "--out", s(&blocker.join("out"))]);
    assert_eq!(res.status.code(), Some(3), "{}", stderr(&res));
}

fn labels(csv: &str) -> Vec<String> {
    csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().to_string()).collect()
}

#[test]
fn analyze_labels_ensembles() {
    let chaotic = bnplast(&["analyze", "--n", "200", "--bias", "0.5", "--count", "20", "--samples", "2000"]);
    assert!(chaotic.status.success(), "{}", stderr(&chaotic));
    let text = String::from_utf8(chaotic.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "n,k,bias,seed,lambda,std_error,label");
    assert_eq!(labels(&text), vec!["chaotic"; 20]);

    let ordered = bnplast(&["analyze", "--n", "200", "--bias", "0.1", "--count", "20", "--samples", "2000"]);
    assert_eq!(labels(&String::from_utf8(ordered.stdout).unwrap()), vec!["ordered"; 20]);
}

#[test]
fn analyze_network_file() {
    let dir = TempDir::new().unwrap();
    let net = generate_network(30, 3, 0.5, 0.5, &mut seeded_stream(3, 0)).unwrap();
    // force every table to constant zero
    let mut doc: serde_json::Value = serde_json::from_str(&net.to_json()).unwrap();
    for t in doc["tables"].as_array_mut().unwrap() {
        *t = serde_json::Value::String("0".repeat(8));
    }
    let path = dir.path().join("constant.json");
    fs::write(&path, doc.to_string()).unwrap();
    let out = dir.path().join("sens.csv");
    let res = bnplast(&["analyze", "--network", s(&path), "--out", s(&out)]);
    assert!(res.status.success(), "{}", stderr(&res));
    let csv = fs::read_to_string(&out).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[4].parse::<f64>().unwrap(), 0.0);
    assert_eq!(row[6], "ordered");

    let broken = dir.path().join("broken.json");
    fs::write(&broken, "{\"n\": 3,").unwrap();
    assert_eq!(bnplast(&["analyze", "--network", s(&broken)]).status.code(), Some(2));
}

#[test]
fn trace_writes_one_row_per_step() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "trace.json",
        r#"{"bias_values": [0.21], "replicas": 1, "iterations": 1, "steps_per_trial": 1200}"#,
    );
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let res = bnplast(&["trace", "--config", s(&cfg), "--out", s(&a), "--seed", "9"]);
    assert!(res.status.success(), "{}", stderr(&res));
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().next().unwrap(), "step,x,y,heading,v_l,v_r,p_max");
    assert_eq!(text.lines().count(), 1201);

    let env_run = Command::new(env!("CARGO_BIN_EXE_bnplast"))
        .args(["trace", "--config", s(&cfg), "--out", s(&b)])
        .env("BNPLAST_SEED", "9")
        .output()
        .unwrap();
    assert!(env_run.status.success());
    assert_eq!(text, fs::read_to_string(&b).unwrap());
}

#[test]
fn dump_trajectory_writes_per_replica_files() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "tiny.json", TINY);
    let out = dir.path().join("out");
    assert!(bnplast(&["run", "--config", s(&cfg), "--out", s(&out), "--dump-trajectory"]).status.success());
    let files: Vec<_> = fs::read_dir(out.join("trajectories")).unwrap().collect();
    assert_eq!(files.len(), 4);
    let one = fs::read_to_string(out.join("trajectories/40_0.5_positive_1.csv")).unwrap();
    // 3 iterations of 50 steps
    assert_eq!(one.lines().count(), 151);
}
