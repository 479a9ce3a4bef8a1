//! Stabilizer Rényi entropies, stabilizer nullity and their unitary versions.
//!
//! All entropies are in bits.

use num_complex::Complex64;
use serde::Serialize;

use crate::circuit::DopedCircuit;
use crate::dense::{self, pauli_coefficients, pauli_matrix, CMatrix, DenseState, DensityMatrix};
use crate::error::{Error, Result};
use crate::par;
use crate::pauli::{PauliIndex, PauliString};
use crate::Limits;

/// Relative threshold on `|tr(P ρ)| / d` below which a Pauli is outside the support.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;
/// Tolerance for `|tr(P ψ)| = 1` when counting stabilizing Paulis.
pub const NULLITY_TOLERANCE: f64 = 1e-9;

/// States whose Pauli spectrum can be computed densely.
pub trait PauliSpectrum {
    fn num_qubits(&self) -> usize;
    fn purity(&self) -> f64;
    /// `tr(P_i ρ)` for every Pauli index.
    fn pauli_expectations(&self, limits: &Limits) -> Result<Vec<f64>>;
}

impl PauliSpectrum for DenseState {
    fn num_qubits(&self) -> usize {
        DenseState::num_qubits(self)
    }

    fn purity(&self) -> f64 {
        1.0
    }

    fn pauli_expectations(&self, limits: &Limits) -> Result<Vec<f64>> {
        self.pauli_expectations_all(limits)
    }
}

impl PauliSpectrum for DensityMatrix {
    fn num_qubits(&self) -> usize {
        DensityMatrix::num_qubits(self)
    }

    fn purity(&self) -> f64 {
        DensityMatrix::purity(self)
    }

    fn pauli_expectations(&self, limits: &Limits) -> Result<Vec<f64>> {
        self.pauli_expectations_all(limits)
    }
}

/// Rényi entropy (bits) of a probability vector; `alpha = 0` counts entries
/// above zero, `alpha = 1` is the Shannon entropy.
pub fn renyi_entropy(probs: impl Iterator<Item = f64>, alpha: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::Argument(format!(
            "Renyi order must be finite and >= 0, got {alpha}"
        )));
    }
    Ok(if alpha == 0.0 {
        (probs.filter(|&p| p > 0.0).count() as f64).log2()
    } else if alpha == 1.0 {
        -probs.filter(|&p| p > 0.0).map(|p| p * p.log2()).sum::<f64>()
    } else {
        probs.filter(|&p| p > 0.0).map(|p| p.powf(alpha)).sum::<f64>().log2() / (1.0 - alpha)
    })
}

/// `Ξ(P) = tr²(P ρ) / (d Pur(ρ))` over the Pauli index order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PauliDistribution {
    n: usize,
    probs: Vec<f64>,
    expectations: Vec<f64>,
    purity: f64,
}

impl PauliDistribution {
    /// Builds `Ξ` from `tr(P_i ρ)`; entries below the support threshold are zeroed.
    pub fn from_expectations(n: usize, expectations: Vec<f64>, purity: f64) -> Result<Self> {
        crate::error::check_dim(1 << (2 * n), expectations.len())?;
        let d = (1u64 << n) as f64;
        let probs = expectations
            .iter()
            .map(|&e| {
                if e.abs() > SUPPORT_THRESHOLD * d {
                    e * e / (d * purity)
                } else {
                    0.0
                }
            })
            .collect();
        Ok(PauliDistribution {
            n,
            probs,
            expectations,
            purity,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, p: PauliIndex) -> f64 {
        self.probs[p.0 as usize]
    }

    /// `tr(P_i ρ)` for every Pauli index.
    pub fn expectations(&self) -> &[f64] {
        &self.expectations
    }

    pub fn purity(&self) -> f64 {
        self.purity
    }

    pub fn support(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn entropy(&self, alpha: f64) -> Result<f64> {
        renyi_entropy(self.probs.iter().copied(), alpha)
    }
}

pub fn xi_state<S: PauliSpectrum>(state: &S, limits: &Limits) -> Result<PauliDistribution> {
    let n = state.num_qubits();
    PauliDistribution::from_expectations(n, state.pauli_expectations(limits)?, state.purity())
}

/// Value of `M_α` with the data it was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MagicReport {
    pub alpha: f64,
    /// Bits.
    pub value: f64,
    /// Number of Paulis (or Pauli pairs) in the support of `Ξ`.
    pub support: usize,
    pub purity: f64,
}

/// `M_α = S_α(Ξ) + S_2(ρ) - log2 d` from a precomputed distribution.
pub fn magic_from_distribution(xi: &PauliDistribution, alpha: f64) -> Result<MagicReport> {
    let s = xi.entropy(alpha)?;
    Ok(MagicReport {
        alpha,
        value: s - xi.purity.log2() - xi.n as f64,
        support: xi.support(),
        purity: xi.purity,
    })
}

pub fn stabilizer_renyi_entropy<S: PauliSpectrum>(state: &S, alpha: f64, limits: &Limits) -> Result<MagicReport> {
    renyi_entropy(std::iter::empty(), alpha)?;
    magic_from_distribution(&xi_state(state, limits)?, alpha)
}

/// `ν(ψ) = n - log2 s`, with `s` the number of Paulis with `|tr(P ψ)| = 1`.
pub fn stabilizer_nullity(psi: &DenseState, limits: &Limits) -> Result<f64> {
    let exps = psi.pauli_expectations_all(limits)?;
    Ok(nullity_from_expectations(psi.num_qubits(), &exps))
}

pub fn nullity_from_expectations(n: usize, exps: &[f64]) -> f64 {
    let s = exps.iter().filter(|e| e.abs() > 1.0 - NULLITY_TOLERANCE).count();
    n as f64 - (s as f64).log2()
}

/// `(1 ⊗ U)|I>` on `2n` qubits; the reference copy sits on the low qubits.
pub fn choi_state(u: &CMatrix, limits: &Limits) -> Result<DenseState> {
    let d = u.nrows();
    if !d.is_power_of_two() || u.ncols() != d {
        return Err(Error::Argument(format!(
            "expected a 2^n square unitary, got {}x{}",
            d,
            u.ncols()
        )));
    }
    let n = d.trailing_zeros() as usize;
    dense::check_pure_limit(2 * n, limits)?;
    let norm = (d as f64).sqrt();
    let mut amps = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            amps[i + d * j] = u[(j, i)] / norm;
        }
    }
    DenseState::from_amplitudes(2 * n, amps)
}

/// Choi state of a Clifford+T circuit.
pub fn choi_state_of_circuit(circuit: &DopedCircuit, limits: &Limits) -> Result<DenseState> {
    choi_state(&dense::unitary_matrix(circuit, limits)?, limits)
}

/// One nonzero entry of `Ξ_U`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairEntry {
    pub p: PauliIndex,
    pub q: PauliIndex,
    /// `tr(P U Q U†) / d`.
    pub chi: f64,
    /// `chi² / d²`.
    pub prob: f64,
}

/// `Ξ_U(P, Q) = tr²(P U Q U†) / d⁴`, stored sparsely.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitaryPauliDistribution {
    n: usize,
    entries: Vec<PairEntry>,
}

impl UnitaryPauliDistribution {
    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Entries in increasing `(Q, P)` index order.
    pub fn entries(&self) -> &[PairEntry] {
        &self.entries
    }

    pub fn support(&self) -> usize {
        self.entries.len()
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.prob).sum()
    }

    pub fn entropy(&self, alpha: f64) -> Result<f64> {
        renyi_entropy(self.entries.iter().map(|e| e.prob), alpha)
    }

    pub fn get(&self, p: PauliIndex, q: PauliIndex) -> f64 {
        self.entries
            .iter()
            .find(|e| e.p == p && e.q == q)
            .map_or(0.0, |e| e.prob)
    }
}

fn unitary_qubits(u: &CMatrix, max: usize) -> Result<usize> {
    let d = u.nrows();
    if !d.is_power_of_two() || u.ncols() != d {
        return Err(Error::Argument(format!(
            "expected a 2^n square unitary, got {}x{}",
            d,
            u.ncols()
        )));
    }
    let n = d.trailing_zeros() as usize;
    if n > max {
        return Err(Error::Capacity {
            what: "qubits for unitary Pauli sweep",
            requested: n,
            limit: max,
        });
    }
    Ok(n)
}

/// Largest unitary for the `16^n` pair sweep.
pub const UNITARY_SWEEP_LIMIT: usize = 5;

pub fn xi_unitary(u: &CMatrix) -> Result<UnitaryPauliDistribution> {
    let n = unitary_qubits(u, UNITARY_SWEEP_LIMIT)?;
    let d = 1usize << n;
    let df = d as f64;
    let columns = par::map(d * d, |qi| {
        let q = PauliString::from_index(PauliIndex(qi as u64), n).expect("index in range");
        let a = u * pauli_matrix(&q) * u.adjoint();
        let coeffs = pauli_coefficients(&a).expect("square matrix");
        coeffs
            .into_iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > SUPPORT_THRESHOLD * df)
            .map(|(pi, c)| {
                let chi = c.re / df;
                PairEntry {
                    p: PauliIndex(pi as u64),
                    q: PauliIndex(qi as u64),
                    chi,
                    prob: chi * chi / (df * df),
                }
            })
            .collect::<Vec<_>>()
    });
    Ok(UnitaryPauliDistribution {
        n,
        entries: columns.into_iter().flatten().collect(),
    })
}

/// `M_α(|U>) = S_α(Ξ_U) - 2 log2 d`.
pub fn choi_magic(u: &CMatrix, alpha: f64) -> Result<MagicReport> {
    let xi = xi_unitary(u)?;
    Ok(MagicReport {
        alpha,
        value: xi.entropy(alpha)? - 2.0 * xi.n as f64,
        support: xi.support(),
        purity: 1.0,
    })
}

/// `ν(U) = 2 log2 d - log2 s(U)`, with `s(U)` the number of pairs with
/// `|tr(P U Q U†)| / d = 1`.
pub fn unitary_stabilizer_nullity(u: &CMatrix) -> Result<f64> {
    let xi = xi_unitary(u)?;
    let s = xi
        .entries
        .iter()
        .filter(|e| e.chi.abs() > 1.0 - NULLITY_TOLERANCE)
        .count();
    Ok(2.0 * xi.n as f64 - (s as f64).log2())
}

/// Largest unitary for the brute-force correlator.
pub const OTOC_LIMIT: usize = 2;

/// `d^{-2} sum_P P A P`, evaluated term by term.
fn pauli_twirl(a: &CMatrix, paulis: &[CMatrix]) -> CMatrix {
    let d = a.nrows();
    let mut acc = CMatrix::zeros(d, d);
    for p in paulis {
        acc += p * a * p;
    }
    acc / Complex64::new((d * d) as f64, 0.0)
}

/// The `4α`-point correlator `d^{-2} sum_{P,Q} otoc_{4α}(P, Q)`, with
/// `d·otoc = tr <P_{2α} prod_{i=1}^{2α} (U P U† Q) P_{i-1} P_i>` averaged over
/// `P_1..P_{2α}` and `P_0 = 1`.
///
/// Inner `P_i` only occur as `P_i A P_i`, so they are averaged as separate twirls.
pub fn otoc(u: &CMatrix, alpha: u32) -> Result<f64> {
    let n = unitary_qubits(u, OTOC_LIMIT)?;
    if !(2..=3).contains(&alpha) {
        return Err(Error::Argument(format!(
            "correlator order alpha must be 2 or 3, got {alpha}"
        )));
    }
    let d = 1usize << n;
    let paulis: Vec<CMatrix> = (0..(d * d) as u64)
        .map(|i| pauli_matrix(&PauliString::from_index(PauliIndex(i), n).expect("index in range")))
        .collect();
    let mut total = 0.0;
    for p in &paulis {
        let up = u * p * u.adjoint();
        for q in &paulis {
            let a = &up * q;
            let twirled = pauli_twirl(&a, &paulis);
            let mut inner = a.clone();
            for _ in 1..2 * alpha {
                inner = &inner * &twirled;
            }
            let outer = pauli_twirl(&inner, &paulis);
            total += outer.trace().re / d as f64;
        }
    }
    Ok(total / (d * d) as f64)
}

/// Reference: the same correlator by explicit enumeration of every
/// `(P_1, ..., P_{2α})` tuple. Exponential in `α`; meant for one qubit.
pub fn otoc_enumerated(u: &CMatrix, alpha: u32) -> Result<f64> {
    let n = unitary_qubits(u, 1)?;
    let d = 1usize << n;
    let paulis: Vec<CMatrix> = (0..(d * d) as u64)
        .map(|i| pauli_matrix(&PauliString::from_index(PauliIndex(i), n).expect("index in range")))
        .collect();
    let m = 2 * alpha as usize;
    let count = paulis.len().pow(m as u32);
    let mut total = 0.0;
    for p in &paulis {
        let up = u * p * u.adjoint();
        for q in &paulis {
            let a = &up * q;
            let mut acc = 0.0;
            for tuple in 0..count {
                let idx: Vec<usize> = (0..m)
                    .map(|k| (tuple / paulis.len().pow(k as u32)) % paulis.len())
                    .collect();
                let mut prod = paulis[idx[m - 1]].clone();
                let mut prev = CMatrix::identity(d, d);
                for i in 0..m {
                    prod = prod * &a * &prev * &paulis[idx[i]];
                    prev = paulis[idx[i]].clone();
                }
                acc += prod.trace().re;
            }
            total += acc / count as f64 / d as f64;
        }
    }
    Ok(total / (d * d) as f64)
}
