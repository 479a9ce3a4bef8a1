//! WebAssembly bindings for the browser demo. Every export takes and returns
//! JSON text; the `*_json` functions hold the logic so they can be tested
//! natively.

use serde::Serialize;
use stabcert::certify::{pauli_dfe, EstimationConfig};
use stabcert::dense::{DenseState, NoiseModel};
use stabcert::doped::outcome_probability;
use stabcert::magic::{stabilizer_nullity, stabilizer_renyi_entropy};
use stabcert::{CircuitFile, DopedCircuit, Error, Limits};
use wasm_bindgen::prelude::*;

/// Demo-sized limits.
const LIMITS: Limits = Limits {
    dense_pure: 8,
    dense_mixed: 5,
    t_max: 12,
};

#[derive(Serialize)]
struct Distribution {
    n: usize,
    t_count: usize,
    /// `(bits, probability, n_cl)` for every output string, qubit 0 leftmost.
    outcomes: Vec<(String, f64, u64)>,
}

#[derive(Serialize)]
struct MagicRow {
    alpha: f64,
    value: f64,
    support: usize,
}

#[derive(Serialize)]
struct Magic {
    rows: Vec<MagicRow>,
    nullity: f64,
}

#[derive(Serialize)]
struct Fidelity {
    estimate: f64,
    truth: Option<f64>,
    samples: u64,
    lower: Option<f64>,
    upper: Option<f64>,
}

fn circuit(json: &str) -> Result<DopedCircuit, Error> {
    CircuitFile::parse(json)?.to_circuit()
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("demo output serializes")
}

/// Output distribution computed with the gadget sum, one string at a time.
pub fn distribution_json(circuit_json: &str) -> Result<String, Error> {
    let u = circuit(circuit_json)?;
    let n = u.num_qubits();
    if n > LIMITS.dense_mixed {
        return Err(Error::Capacity {
            what: "qubits in the demo distribution",
            requested: n,
            limit: LIMITS.dense_mixed,
        });
    }
    let outcomes = (0..1usize << n)
        .map(|i| {
            let bits: Vec<bool> = (0..n).map(|q| (i >> q) & 1 == 1).collect();
            let (p, ledger) = outcome_probability(&u, &bits, &LIMITS)?;
            let label = bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
            Ok((label, p, ledger.n_cl))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(to_json(&Distribution {
        n,
        t_count: u.t_count(),
        outcomes,
    }))
}

pub fn magic_json(circuit_json: &str, alphas: &[f64]) -> Result<String, Error> {
    let u = circuit(circuit_json)?;
    let psi = DenseState::simulate(&u, &vec![false; u.num_qubits()], &LIMITS)?;
    let rows = alphas
        .iter()
        .map(|&alpha| {
            let m = stabilizer_renyi_entropy(&psi, alpha, &LIMITS)?;
            Ok(MagicRow {
                alpha,
                value: m.value,
                support: m.support,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(to_json(&Magic {
        rows,
        nullity: stabilizer_nullity(&psi, &LIMITS)?,
    }))
}

pub fn fidelity_json(circuit_json: &str, noise: &str, epsilon: f64, delta: f64, seed: u64) -> Result<String, Error> {
    let u = circuit(circuit_json)?;
    let noise: NoiseModel = noise.parse()?;
    let psi = DenseState::simulate(&u, &vec![false; u.num_qubits()], &LIMITS)?;
    let rho = noise.apply(&psi.to_density())?;
    let cfg = EstimationConfig {
        record_trials: false,
        ..EstimationConfig::new(epsilon, delta, seed)
    };
    let r = pauli_dfe(&psi, &rho, &cfg, &LIMITS)?;
    Ok(to_json(&Fidelity {
        estimate: r.estimate,
        truth: r.truth,
        samples: r.samples,
        lower: r.bounds.map(|b| b.protocol_lower),
        upper: r.bounds.map(|b| b.upper),
    }))
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub fn distribution(circuit_json: &str) -> Result<String, JsError> {
    distribution_json(circuit_json).map_err(js)
}

#[wasm_bindgen]
pub fn magic(circuit_json: &str, alphas: Vec<f64>) -> Result<String, JsError> {
    magic_json(circuit_json, &alphas).map_err(js)
}

#[wasm_bindgen]
pub fn fidelity(circuit_json: &str, noise: &str, epsilon: f64, delta: f64, seed: u32) -> Result<String, JsError> {
    fidelity_json(circuit_json, noise, epsilon, delta, seed as u64).map_err(js)
}
