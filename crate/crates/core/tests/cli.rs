use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn bin(args: &[&str], stdin: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_refusal-index"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn simulated(dir: &tempfile::TempDir, name: &str, rho: &str, n: &str, seed: &str) -> String {
    let path = dir.path().join(name);
    let p = path.to_str().unwrap().to_string();
    let out = bin(&["simulate", "--rho", rho, "--refusal", "0.4", "--error", "0.5", "--n", n, "--seed", seed, "--output", &p], b"");
    assert!(out.status.success());
    p
}

#[test]
fn simulate_pipe_ri_is_byte_identical() {
    let runs: Vec<Vec<u8>> = (0..3)
        .map(|_| {
            let sim = bin(&["simulate", "--rho", "0.5", "--refusal", "0.4", "--error", "0.5", "--n", "5000", "--seed", "9"], b"");
            assert!(sim.status.success());
            let ri = bin(&["ri", "--stdin", "--bootstrap", "200", "--seed", "3"], &sim.stdout);
            assert!(ri.status.success());
            ri.stdout
        })
        .collect();
    assert!(runs.windows(2).all(|w| w[0] == w[1]));
    let v: Value = serde_json::from_slice(&runs[0]).unwrap();
    for key in ["model", "setting", "n", "c1", "r", "c2", "rho", "ri", "degenerate", "at_boundary", "ci"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["n"], 5000);
    let ci = &v["ci"];
    assert!(ci["lo"].as_f64().unwrap() <= v["ri"].as_f64().unwrap());
    assert!(v["ri"].as_f64().unwrap() <= ci["hi"].as_f64().unwrap());
}

#[test]
fn file_inputs_and_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulated(&dir, "sim.jsonl", "0.6", "3000", "1");

    let v = json(&bin(&["validate", "--input", &path], b""));
    assert_eq!(v["valid"], true);
    assert_eq!(v["units"][0]["questions"], 3000);

    let v = json(&bin(&["baselines", "--input", &path], b""));
    let row = &v[0];
    let (c, ca) = (row["correct"].as_f64().unwrap(), row["c_over_a"].as_f64().unwrap());
    assert!((row["f_score"].as_f64().unwrap() - 2.0 * c * ca / (c + ca)).abs() < 1e-12);

    let v = json(&bin(&["fit-copulas", "--input", &path], b""));
    assert!(v["units"].is_array() && v["win_rates"].is_array());

    let v = json(&bin(&["subset-cv", "--input", &path, "--sizes", "100,1000", "--k", "10", "--seed", "2"], b""));
    assert!(v.to_string().contains("\"size\":1000"));

    let csv = bin(&["ri", "--input", &path, "--format", "csv"], b"");
    assert!(csv.status.success());
    assert!(String::from_utf8(csv.stdout).unwrap().starts_with("model,setting,"));
}

#[test]
fn validate_reports_codes_and_exits_two() {
    let input = concat!(
        "{\"question_id\":\"q1\",\"model_id\":\"m\",\"setting_id\":\"s\",\"pass\":1,\"label\":\"refused\"}\n",
        "{\"question_id\":\"q2\",\"model_id\":\"m\",\"setting_id\":\"s\",\"pass\":3,\"label\":\"correct\"}\n",
    );
    let out = bin(&["validate", "--stdin"], input.as_bytes());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("LINE 2:"), "{err}");
}

#[test]
fn usage_and_io_errors() {
    assert_eq!(bin(&["ri"], b"").status.code(), Some(1));
    assert_eq!(bin(&["curves", "--iso-ri", "--rho", "0.5"], b"").status.code(), Some(1));
    assert_eq!(bin(&["ri", "--input", "/nonexistent/x.jsonl"], b"").status.code(), Some(2));
    assert_eq!(bin(&["rank", "--stdin"], b"").status.code(), Some(1));
}

#[test]
fn rank_from_score_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scores.jsonl");
    let mut f = std::fs::File::create(&path).unwrap();
    for (m, base) in [("a", 0.1), ("b", 0.5), ("c", 0.9)] {
        for s in 0..4 {
            let c = base * 0.8 + s as f64 * 0.01;
            let r = 0.1 + s as f64 * 0.05;
            for (metric, value) in [("correct", c), ("refusal", r), ("ri", base - s as f64 * 0.02)] {
                writeln!(f, "{{\"model\":\"{m}\",\"setting\":\"s{s}\",\"metric\":\"{metric}\",\"value\":{value}}}").unwrap();
            }
        }
    }
    drop(f);
    let p = path.to_str().unwrap();
    let a = bin(&["rank", "--scores", p, "--draws", "200", "--seed", "5"], b"");
    let b = bin(&["rank", "--scores", p, "--draws", "200", "--seed", "5"], b"");
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["models"], 3);
    let text = v.to_string();
    assert!(text.contains("\"kendalls_w\":1.0") || text.contains("\"kendalls_w\":1"), "{text}");
}
