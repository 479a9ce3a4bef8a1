//! Clifford+T simulation, stabilizer Rényi entropy and direct fidelity
//! estimation.

pub mod certify;
pub mod circuit;
pub mod dense;
pub mod doped;
pub mod error;
pub mod magic;
pub mod par;
mod pathsum;
pub mod pauli;
pub mod stab;

pub use circuit::{CircuitFile, CliffordGate, DopedCircuit, Gate};
pub use error::{Error, Result};
pub use pauli::{Pauli1, PauliIndex, PauliString};
pub use stab::{StabInnerProduct, StabilizerState, StabilizerTableau};

/// Size limits for the exponential-cost routines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Limits {
    /// Largest qubit count for statevectors.
    pub dense_pure: usize,
    /// Largest qubit count for density matrices and dense unitaries.
    pub dense_mixed: usize,
    /// Largest T-count for gadget-based simulation.
    pub t_max: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            dense_pure: 12,
            dense_mixed: 7,
            t_max: 16,
        }
    }
}
