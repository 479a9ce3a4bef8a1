use serde_json::Value;
use stabcert_wasm::{distribution_json, fidelity_json, magic_json};

const BELL: &str = r#"{"n": 2, "gates": [{"g": "H", "q": [0]}, {"g": "CX", "q": [0, 1]}]}"#;
const HT: &str = r#"{"n": 1, "gates": [{"g": "H", "q": [0]}, {"g": "T", "q": [0]}, {"g": "H", "q": [0]}]}"#;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn distribution_sums_to_one() {
    let d = parse(distribution_json(HT).unwrap());
    let probs: Vec<f64> = d["outcomes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| o[1].as_f64().unwrap())
        .collect();
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!((probs[0] - 0.8535533905932737).abs() < 1e-12);
    assert_eq!(d["t_count"], 1);
}

#[test]
fn magic_of_bell_and_t() {
    let m = parse(magic_json(BELL, &[0.0, 2.0]).unwrap());
    assert!(m["rows"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["value"].as_f64().unwrap().abs() < 1e-12));
    let t = r#"{"n": 1, "gates": [{"g": "H", "q": [0]}, {"g": "T", "q": [0]}]}"#;
    let m = parse(magic_json(t, &[2.0]).unwrap());
    assert!((m["rows"][0]["value"].as_f64().unwrap() - (2.0 - 3f64.log2())).abs() < 1e-12);
    assert_eq!(m["nullity"].as_f64(), Some(1.0));
}

#[test]
fn fidelity_and_errors() {
    let f = parse(fidelity_json(BELL, "global:0.2", 0.1, 0.05, 1).unwrap());
    assert!((f["truth"].as_f64().unwrap() - 0.85).abs() < 1e-12);
    assert!((f["estimate"].as_f64().unwrap() - 0.85).abs() < 0.1);
    assert!(fidelity_json(BELL, "bogus", 0.1, 0.05, 1).is_err());
    assert!(distribution_json("{").is_err());
    let big = r#"{"n": 9, "gates": []}"#;
    assert!(matches!(distribution_json(big), Err(stabcert::Error::Capacity { .. })));
}
