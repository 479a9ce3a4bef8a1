//! Gate and circuit types shared by the simulators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A Clifford generator acting on one or two qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CliffordGate {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    /// Control, target.
    CX(usize, usize),
    CZ(usize, usize),
    Swap(usize, usize),
}

impl CliffordGate {
    pub fn name(&self) -> &'static str {
        match self {
            CliffordGate::H(_) => "H",
            CliffordGate::S(_) => "S",
            CliffordGate::Sdg(_) => "SDG",
            CliffordGate::X(_) => "X",
            CliffordGate::Y(_) => "Y",
            CliffordGate::Z(_) => "Z",
            CliffordGate::CX(..) => "CX",
            CliffordGate::CZ(..) => "CZ",
            CliffordGate::Swap(..) => "SWAP",
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            CliffordGate::H(q)
            | CliffordGate::S(q)
            | CliffordGate::Sdg(q)
            | CliffordGate::X(q)
            | CliffordGate::Y(q)
            | CliffordGate::Z(q) => vec![q],
            CliffordGate::CX(a, b) | CliffordGate::CZ(a, b) | CliffordGate::Swap(a, b) => {
                vec![a, b]
            }
        }
    }

    pub fn inverse(&self) -> CliffordGate {
        match *self {
            CliffordGate::S(q) => CliffordGate::Sdg(q),
            CliffordGate::Sdg(q) => CliffordGate::S(q),
            g => g,
        }
    }

    /// Same gate with every qubit index shifted by `offset`.
    pub fn shifted(&self, offset: usize) -> CliffordGate {
        match *self {
            CliffordGate::H(q) => CliffordGate::H(q + offset),
            CliffordGate::S(q) => CliffordGate::S(q + offset),
            CliffordGate::Sdg(q) => CliffordGate::Sdg(q + offset),
            CliffordGate::X(q) => CliffordGate::X(q + offset),
            CliffordGate::Y(q) => CliffordGate::Y(q + offset),
            CliffordGate::Z(q) => CliffordGate::Z(q + offset),
            CliffordGate::CX(a, b) => CliffordGate::CX(a + offset, b + offset),
            CliffordGate::CZ(a, b) => CliffordGate::CZ(a + offset, b + offset),
            CliffordGate::Swap(a, b) => CliffordGate::Swap(a + offset, b + offset),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let qs = self.qubits();
        for &q in &qs {
            if q >= n {
                return Err(Error::Dimension {
                    expected: n,
                    found: q + 1,
                });
            }
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(Error::Argument(format!(
                "{} needs two distinct qubits, got {}",
                self.name(),
                qs[0]
            )));
        }
        Ok(())
    }
}

/// Inverse of a gate sequence (reversed, each gate inverted).
pub fn inverse_circuit(gates: &[CliffordGate]) -> Vec<CliffordGate> {
    gates.iter().rev().map(CliffordGate::inverse).collect()
}

/// A gate of a Clifford+T circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    Clifford(CliffordGate),
    T(usize),
    Tdg(usize),
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::Clifford(g) => g.name(),
            Gate::T(_) => "T",
            Gate::Tdg(_) => "TDG",
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::Clifford(g) => g.qubits(),
            Gate::T(q) | Gate::Tdg(q) => vec![*q],
        }
    }

    pub fn is_clifford(&self) -> bool {
        matches!(self, Gate::Clifford(_))
    }

    /// Builds a gate from its file name and qubit list.
    pub fn from_name(name: &str, q: &[usize]) -> Result<Gate> {
        let one = |q: &[usize]| -> Result<usize> {
            match q {
                [a] => Ok(*a),
                _ => Err(Error::Parse(format!("gate {name} takes 1 qubit, got {}", q.len()))),
            }
        };
        let two = |q: &[usize]| -> Result<(usize, usize)> {
            match q {
                [a, b] => Ok((*a, *b)),
                _ => Err(Error::Parse(format!("gate {name} takes 2 qubits, got {}", q.len()))),
            }
        };
        let g = match name.to_ascii_uppercase().as_str() {
            "H" => Gate::Clifford(CliffordGate::H(one(q)?)),
            "S" => Gate::Clifford(CliffordGate::S(one(q)?)),
            "SDG" => Gate::Clifford(CliffordGate::Sdg(one(q)?)),
            "X" => Gate::Clifford(CliffordGate::X(one(q)?)),
            "Y" => Gate::Clifford(CliffordGate::Y(one(q)?)),
            "Z" => Gate::Clifford(CliffordGate::Z(one(q)?)),
            "CX" | "CNOT" => {
                let (a, b) = two(q)?;
                Gate::Clifford(CliffordGate::CX(a, b))
            }
            "CZ" => {
                let (a, b) = two(q)?;
                Gate::Clifford(CliffordGate::CZ(a, b))
            }
            "SWAP" => {
                let (a, b) = two(q)?;
                Gate::Clifford(CliffordGate::Swap(a, b))
            }
            "T" => Gate::T(one(q)?),
            "TDG" => Gate::Tdg(one(q)?),
            other => return Err(Error::Parse(format!("unknown gate {other:?}"))),
        };
        Ok(g)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            Gate::Clifford(g) => g.validate(n),
            Gate::T(q) | Gate::Tdg(q) => {
                if *q >= n {
                    Err(Error::Dimension {
                        expected: n,
                        found: q + 1,
                    })
                } else {
                    Ok(())
                }
            }
        }
    }
}

impl From<CliffordGate> for Gate {
    fn from(g: CliffordGate) -> Self {
        Gate::Clifford(g)
    }
}

/// A Clifford+T circuit on `n` qubits, applied to `|0^n>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DopedCircuit {
    n: usize,
    gates: Vec<Gate>,
}

impl DopedCircuit {
    pub fn new(n: usize, gates: Vec<Gate>) -> Result<Self> {
        for g in &gates {
            g.validate(n)?;
        }
        Ok(DopedCircuit { n, gates })
    }

    pub fn from_clifford(n: usize, gates: &[CliffordGate]) -> Result<Self> {
        Self::new(n, gates.iter().copied().map(Gate::Clifford).collect())
    }

    pub fn empty(n: usize) -> Self {
        DopedCircuit { n, gates: vec![] }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Number of T and T† gates.
    pub fn t_count(&self) -> usize {
        self.gates.iter().filter(|g| !g.is_clifford()).count()
    }

    pub fn push(&mut self, g: Gate) -> Result<()> {
        g.validate(self.n)?;
        self.gates.push(g);
        Ok(())
    }

    /// `other` applied after `self`.
    pub fn then(&self, other: &DopedCircuit) -> Result<DopedCircuit> {
        crate::error::check_dim(self.n, other.n)?;
        let mut gates = self.gates.clone();
        gates.extend_from_slice(&other.gates);
        Ok(DopedCircuit { n: self.n, gates })
    }

    /// Clifford gates applied after this circuit.
    pub fn then_clifford(&self, gates: &[CliffordGate]) -> Result<DopedCircuit> {
        let mut out = self.clone();
        for g in gates {
            out.push(Gate::Clifford(*g))?;
        }
        Ok(out)
    }

    /// Side-by-side product `self ⊗ other`, with `other` on the higher qubits.
    pub fn tensor(&self, other: &DopedCircuit) -> DopedCircuit {
        let mut gates = self.gates.clone();
        for g in &other.gates {
            gates.push(match *g {
                Gate::Clifford(c) => Gate::Clifford(c.shifted(self.n)),
                Gate::T(q) => Gate::T(q + self.n),
                Gate::Tdg(q) => Gate::Tdg(q + self.n),
            });
        }
        DopedCircuit {
            n: self.n + other.n,
            gates,
        }
    }

    pub fn to_file(&self) -> CircuitFile {
        CircuitFile {
            n: self.n,
            gates: self
                .gates
                .iter()
                .map(|g| GateRecord {
                    g: g.name().to_string(),
                    q: g.qubits(),
                })
                .collect(),
            label: None,
            seed: None,
        }
    }
}

/// One gate record of the JSON circuit file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateRecord {
    pub g: String,
    pub q: Vec<usize>,
}

/// On-disk circuit description: `{"n": 2, "gates": [{"g": "H", "q": [0]}, ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitFile {
    pub n: usize,
    pub gates: Vec<GateRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl CircuitFile {
    pub fn parse(text: &str) -> Result<CircuitFile> {
        let file: CircuitFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        file.to_circuit()?;
        Ok(file)
    }

    pub fn emit(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit file serializes")
    }

    pub fn to_circuit(&self) -> Result<DopedCircuit> {
        let gates = self
            .gates
            .iter()
            .map(|r| Gate::from_name(&r.g, &r.q))
            .collect::<Result<Vec<_>>>()?;
        DopedCircuit::new(self.n, gates).map_err(|e| Error::Parse(e.to_string()))
    }
}
