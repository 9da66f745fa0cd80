use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_tiltlab"));
    c.env_remove("TILTLAB_BUDGET");
    c
}

fn spec(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("specs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a CSV with one metadata line and one header row.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(2).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn guesswork_binary_pairs() {
    let s2 = spec("s2.json");
    let o = run(&["guesswork", "--source", s2.to_str().unwrap(), "--n", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("# tool=tiltlab"));
    assert!(first.contains("source_sha256="));
    assert!(first.contains("n=2"));
    assert_eq!(text.lines().nth(1).unwrap(), "string,logprob_nats,G,R");
    let r = rows(&text);
    assert_eq!(r.len(), 4);
    assert_eq!(r[0][0], "bb");
    assert_eq!(r[0][2], "1");
    assert_eq!(r[0][3], "4");
}

#[test]
fn guesswork_directory_output() {
    let dir = tempfile::tempdir().unwrap();
    let s3 = spec("s3_markov.json");
    let o = run(&["guesswork", "--source", s3.to_str().unwrap(), "--n", "3", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let table = std::fs::read_to_string(dir.path().join("rank_table.csv")).unwrap();
    assert!(table.lines().next().unwrap().contains("initial=stationary"));
    assert_eq!(rows(&table).len(), 27);
    let pmf = std::fs::read_to_string(dir.path().join("pmf.csv")).unwrap();
    let total: f64 = rows(&pmf).iter().map(|r| r[1].parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn rate_curve_passes_through_entropy() {
    let s2 = spec("s2.json");
    let o = run(&["rate", "--source", s2.to_str().unwrap(), "--kind", "g", "--t-grid", "0.5004024"]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    assert_eq!(r[0][0], "forward_g");
    assert!(r[0][3].parse::<f64>().unwrap().abs() < 1e-9);
    assert!(r[0][4].parse::<f64>().unwrap().abs() < 1e-6);

    let o = run(&["rate", "--source", s2.to_str().unwrap(), "--kind", "r", "--samples", "9"]);
    assert_eq!(rows(&stdout(&o)).len(), 9);
}

#[test]
fn typical_writes_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let s3 = spec("s3.json");
    let o = run(&[
        "typical", "--source", s3.to_str().unwrap(), "--n", "6", "--alpha", "-0.5", "--epsilon", "0.1", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let bounds = std::fs::read_to_string(dir.path().join("bounds.csv")).unwrap();
    assert_eq!(bounds.lines().nth(1).unwrap(), "bound_id,lhs,rhs,pass");
    assert!(rows(&bounds).iter().all(|r| r[3] != "fail"));
    let sets = std::fs::read_to_string(dir.path().join("sets.csv")).unwrap();
    assert!(rows(&sets).iter().all(|r| ["A", "B", "D", "E"].contains(&r[0].as_str())));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["all_pass"], serde_json::Value::Bool(true));
    assert_eq!(report["a"]["size"].as_u64().unwrap() / 2, report["b"]["size"].as_u64().unwrap());
}

#[test]
fn approx_overlay_has_all_series() {
    let dir = tempfile::tempdir().unwrap();
    let hmm = spec("s3_hmm.json");
    let o = run(&["approx", "--source", hmm.to_str().unwrap(), "--n", "4", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let overlay = std::fs::read_to_string(dir.path().join("overlay.csv")).unwrap();
    let r = rows(&overlay);
    assert_eq!(r.iter().filter(|x| x[0] == "exact").count(), 81);
    assert_eq!(r.iter().filter(|x| x[0] == "forward").count(), 61);
    assert_eq!(r.iter().filter(|x| x[0] == "reverse").count(), 61);
    let approx = std::fs::read_to_string(dir.path().join("approx.csv")).unwrap();
    assert_eq!(approx.lines().nth(1).unwrap(), "branch,alpha,level_nats,approx_rank,probability");
}

#[test]
fn tilt_and_measures() {
    let s3 = spec("s3.json");
    let o = run(&["tilt", "--source", s3.to_str().unwrap(), "--alpha-grid", "0,1"]);
    let r = rows(&stdout(&o));
    assert_eq!(r[1], vec!["1", "0.2", "0.3", "0.5"]);
    let o = run(&["measures", "--source", s3.to_str().unwrap(), "--n", "2", "--alpha", "-1"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let m = &v["measures"];
    assert!(m["relative_entropy"].as_f64().unwrap() > 0.0);
    assert_eq!(m["n"], 2);
}

#[test]
fn exit_codes() {
    let s2 = spec("s2.json");
    let s2 = s2.to_str().unwrap();
    assert_eq!(run(&["guesswork", "--source", s2]).status.code(), Some(2));
    assert_eq!(run(&["typical", "--source", s2, "--n", "4", "--alpha", "0", "--epsilon", "0.1"]).status.code(), Some(2));
    assert_eq!(run(&["guesswork", "--source", s2, "--n", "30"]).status.code(), Some(1));
    assert_eq!(run(&["rate", "--source", s2, "--t-grid", "5"]).status.code(), Some(1));
    let o = bin().args(["guesswork", "--source", s2, "--n", "4"]).env("TILTLAB_BUDGET", "15").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = bin().args(["guesswork", "--source", s2, "--n", "4"]).env("TILTLAB_BUDGET", "16").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let o = bin().args(["guesswork", "--source", s2, "--n", "4"]).env("TILTLAB_BUDGET", "lots").output().unwrap();
    assert_eq!(o.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"kind":"categorical","alphabet":["a","b"],"probs":[0.5,0.5]}"#).unwrap();
    assert_eq!(run(&["guesswork", "--source", bad.to_str().unwrap(), "--n", "2"]).status.code(), Some(2));
}

#[test]
fn identical_runs_are_byte_identical() {
    let s3 = spec("s3.json");
    let s3 = s3.to_str().unwrap();
    for args in [
        vec!["guesswork", "--source", s3, "--n", "6"],
        vec!["approx", "--source", s3, "--n", "5"],
        vec!["rate", "--source", s3, "--kind", "i"],
        vec!["typical", "--source", s3, "--n", "5", "--alpha", "2", "--epsilon", "0.2"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn verify_quick_reports_consistently() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("verify.json");
    let o = run(&["verify", "--quick", "--seed", "11", "--out", out.to_str().unwrap()]);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let outcomes = report["outcomes"].as_array().unwrap();
    assert_eq!(outcomes.len(), 8);
    let all = outcomes.iter().all(|o| o["passed"].as_bool().unwrap());
    assert_eq!(report["passed"].as_bool().unwrap(), all);
    assert_eq!(o.status.code(), Some(if all { 0 } else { 3 }));
    let stderr = String::from_utf8(o.stderr).unwrap();
    assert_eq!(stderr.lines().filter(|l| l.contains(" criterion ")).count(), 8);
}
