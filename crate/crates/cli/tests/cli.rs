use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_stabcert");

fn stabcert(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("STABCERT_WORKERS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn circuit(dir: &Path, name: &str, n: usize, gates: &[(&str, &[usize])]) -> String {
    let gates: Vec<String> = gates
        .iter()
        .map(|(g, q)| format!(r#"{{"g": "{g}", "q": {q:?}}}"#))
        .collect();
    let path = dir.join(name);
    fs::write(&path, format!(r#"{{"n": {n}, "gates": [{}]}}"#, gates.join(", "))).unwrap();
    path.to_str().unwrap().to_string()
}

fn field(out: &str, key: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix(key).map(|v| v.trim().parse().unwrap()))
        .unwrap()
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn simulate_probabilities() {
    let tmp = TempDir::new().unwrap();
    let h = circuit(tmp.path(), "h.json", 1, &[("H", &[0])]);
    assert!((field(&stdout(&stabcert(&["simulate", &h, "0"])), "probability") - 0.5).abs() < 1e-12);
    let hth = circuit(tmp.path(), "hth.json", 1, &[("H", &[0]), ("T", &[0]), ("H", &[0])]);
    let out = stdout(&stabcert(&["simulate", &hth, "0"]));
    assert!((field(&out, "probability") - 0.8535534).abs() < 1e-7);
    assert_eq!(field(&out, "n_cl"), 16.0);
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let ts: Vec<(&str, &[usize])> = vec![("T", &[0]); 17];
    let many = circuit(tmp.path(), "t17.json", 1, &ts);
    assert_eq!(stabcert(&["simulate", &many, "0"]).status.code(), Some(3));
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, r#"{"n": 1, "gates": [{"g": "CCX", "q": [0]}]}"#).unwrap();
    assert_eq!(
        stabcert(&["simulate", bad.to_str().unwrap(), "0"]).status.code(),
        Some(2)
    );
    let out_of_range = circuit(tmp.path(), "oor.json", 1, &[("H", &[3])]);
    assert_eq!(stabcert(&["magic", &out_of_range]).status.code(), Some(2));
    assert_eq!(
        stabcert(&["simulate", "/nonexistent/circuit.json", "0"]).status.code(),
        Some(2)
    );
    let bell = circuit(tmp.path(), "bell.json", 2, &[("H", &[0]), ("CX", &[0, 1])]);
    let obs = tmp.path().join("obs.json");
    fs::write(&obs, r#"["II", "XX", "ZI", "ZZ"]"#).unwrap();
    let o = stabcert(&["dfe", &bell, "--observables", obs.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stabcert(&["dfe", &bell, "--noise", "global:2"]).status.code(), Some(2));
}

#[test]
fn magic_rows() {
    let tmp = TempDir::new().unwrap();
    let bell = circuit(tmp.path(), "bell.json", 2, &[("H", &[0]), ("CX", &[0, 1])]);
    let out = stdout(&stabcert(&["magic", &bell, "--alpha", "0,1,2,3"]));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("alpha,m_alpha,support,nullity"));
    for l in lines {
        let m: f64 = l.split(',').nth(1).unwrap().parse().unwrap();
        assert!(m.abs() < 1e-12, "{l}");
    }
    let t = circuit(tmp.path(), "t.json", 1, &[("H", &[0]), ("T", &[0])]);
    let out = stdout(&stabcert(&["magic", &t, "--alpha", "0,2"]));
    let rows: Vec<Vec<f64>> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert!((rows[1][1] - 0.4150375).abs() < 1e-7);
    assert!((rows[0][1] - (rows[0][2] / 2.0).log2()).abs() < 1e-12);
    assert_eq!(rows[0][3], 1.0);
}

#[test]
fn dfe_on_zero_state_is_exact() {
    let tmp = TempDir::new().unwrap();
    let zero = circuit(tmp.path(), "zero.json", 2, &[]);
    let out = tmp.path().join("run");
    stdout(&stabcert(&["dfe", &zero, "--out", out.to_str().unwrap()]));
    let r = report(&out);
    assert_eq!(r["estimate"].as_f64(), Some(1.0));
    assert_eq!(r["samples"], r["k"]);
    for f in ["report.json", "trials.jsonl", "trials.csv", "manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let csv = fs::read_to_string(out.join("trials.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("index,sample,shots,outcome,value"));
    assert_eq!(csv.lines().count() as u64 - 1, r["k"].as_u64().unwrap());
}

#[test]
fn sfe_on_depolarized_bell() {
    let tmp = TempDir::new().unwrap();
    let bell = circuit(tmp.path(), "bell.json", 2, &[("H", &[0]), ("CX", &[0, 1])]);
    let out = tmp.path().join("run");
    stdout(&stabcert(&[
        "sfe",
        &bell,
        "--noise",
        "global:0.2",
        "--seed",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]));
    let r = report(&out);
    assert!((r["estimate"].as_f64().unwrap() - 0.85).abs() <= 0.1);
    assert!((r["truth"].as_f64().unwrap() - 0.85).abs() < 1e-12);
    assert_eq!(
        r["total_cost"].as_u64(),
        Some(r["samples"].as_u64().unwrap() * r["classical_cost"].as_u64().unwrap())
    );
}

#[test]
fn process_on_clifford_is_one() {
    let tmp = TempDir::new().unwrap();
    let c = circuit(tmp.path(), "c.json", 2, &[("H", &[0]), ("CX", &[0, 1]), ("S", &[1])]);
    let r: serde_json::Value = serde_json::from_str(&stdout(&stabcert(&["process", &c]))).unwrap();
    assert!((r["estimate"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let r: serde_json::Value =
        serde_json::from_str(&stdout(&stabcert(&["process", &c, "--noise", "local:0.1"]))).unwrap();
    assert!(r["truth"].as_f64().unwrap() < 1.0);
}

#[test]
fn scaling_columns() {
    let out = stdout(&stabcert(&["scaling", "--n", "3", "--t", "0..3", "--samples", "10"]));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("t,mean_exp_m2,stderr,paper_bound,ratio"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert!((first[1] - 1.0).abs() < 1e-12);
    assert!((first[3] - 1.0).abs() < 1e-12);
    assert_eq!(out.lines().count(), 5);
    let p = stdout(&stabcert(&[
        "scaling",
        "--kind",
        "process",
        "--n",
        "2",
        "--t",
        "0..1",
        "--samples",
        "4",
    ]));
    assert_eq!(p.lines().next(), Some("t,mean_exp_m2,stderr,paper_bound,ratio"));
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let out = dir.join(name);
    let mut all = args.to_vec();
    all.extend(["--out", out.to_str().unwrap()]);
    stdout(&stabcert(&all));
    out
}

#[test]
fn reports_are_reproducible_and_replayable() {
    let tmp = TempDir::new().unwrap();
    let c = circuit(
        tmp.path(),
        "c.json",
        3,
        &[
            ("H", &[0]),
            ("T", &[0]),
            ("CX", &[0, 1]),
            ("H", &[2]),
            ("T", &[2]),
            ("CZ", &[1, 2]),
        ],
    );
    for sub in [
        vec!["dfe", &c, "--noise", "local:0.1"],
        vec!["sfe", &c, "--noise", "global:0.1", "--k", "200", "--l", "5"],
        vec!["process", &c, "--noise", "overrotation:0.1"],
    ] {
        let mut a = sub.clone();
        a.extend(["--seed", "11", "--workers", "1"]);
        let mut b = sub.clone();
        b.extend(["--seed", "11", "--workers", "3"]);
        let first = run_to(tmp.path(), "a", &a);
        let second = run_to(tmp.path(), "b", &b);
        let manifest = first.join("manifest.json");
        let replayed = run_to(
            tmp.path(),
            "c",
            &["replay", manifest.to_str().unwrap(), "--workers", "2"],
        );
        for f in ["report.json", "trials.jsonl", "trials.csv"] {
            let want = fs::read(first.join(f)).unwrap();
            assert_eq!(fs::read(second.join(f)).unwrap(), want, "{} {f}", sub[0]);
            assert_eq!(fs::read(replayed.join(f)).unwrap(), want, "{} {f} replay", sub[0]);
        }
    }
}
