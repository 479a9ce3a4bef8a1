//! Stabilizer states: tableau evolution, measurement, exact overlaps and
//! uniform Clifford sampling.

use std::collections::{HashMap, VecDeque};

use rand::Rng;

use crate::circuit::{inverse_circuit, CliffordGate};
use crate::error::{check_dim, Error, Result};
use crate::pathsum::PathSum;
pub use crate::pathsum::StabInnerProduct;
use crate::pauli::{Pauli1, PauliString};

/// Replaces `p` by `g p g†`.
pub fn conjugate(p: &mut PauliString, g: &CliffordGate) {
    match *g {
        CliffordGate::H(q) => {
            let (x, z) = (p.x(q), p.z(q));
            if x && z {
                p.add_phase(2);
            }
            p.set_x(q, z);
            p.set_z(q, x);
        }
        CliffordGate::S(q) => {
            let (x, z) = (p.x(q), p.z(q));
            if x && z {
                p.add_phase(2);
            }
            p.set_z(q, z ^ x);
        }
        CliffordGate::Sdg(q) => {
            let (x, z) = (p.x(q), p.z(q));
            if x && !z {
                p.add_phase(2);
            }
            p.set_z(q, z ^ x);
        }
        CliffordGate::X(q) => {
            if p.z(q) {
                p.add_phase(2);
            }
        }
        CliffordGate::Z(q) => {
            if p.x(q) {
                p.add_phase(2);
            }
        }
        CliffordGate::Y(q) => {
            if p.x(q) ^ p.z(q) {
                p.add_phase(2);
            }
        }
        CliffordGate::CX(c, t) => {
            let (xc, zc, xt, zt) = (p.x(c), p.z(c), p.x(t), p.z(t));
            if xc && zt && !(xt ^ zc) {
                p.add_phase(2);
            }
            p.set_x(t, xt ^ xc);
            p.set_z(c, zc ^ zt);
        }
        CliffordGate::CZ(a, b) => {
            conjugate(p, &CliffordGate::H(b));
            conjugate(p, &CliffordGate::CX(a, b));
            conjugate(p, &CliffordGate::H(b));
        }
        CliffordGate::Swap(a, b) => {
            let (pa, pb) = (p.get(a), p.get(b));
            p.set(a, pb);
            p.set(b, pa);
        }
    }
}

/// Aaronson–Gottesman tableau of an n-qubit stabilizer state.
///
/// Row `i` of `destabilizers` anticommutes with row `i` of `stabilizers`
/// and commutes with every other row. Stabilizer phases are `0` or `2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    destabilizers: Vec<PauliString>,
    stabilizers: Vec<PauliString>,
}

impl StabilizerTableau {
    /// Tableau of `|0^n>`.
    pub fn from_zero(n: usize) -> Self {
        StabilizerTableau {
            n,
            destabilizers: (0..n).map(|q| PauliString::single(n, q, Pauli1::X)).collect(),
            stabilizers: (0..n).map(|q| PauliString::single(n, q, Pauli1::Z)).collect(),
        }
    }

    /// Tableau of `C|0^n>`.
    pub fn from_circuit(n: usize, gates: &[CliffordGate]) -> Result<Self> {
        let mut t = Self::from_zero(n);
        t.apply_circuit(gates)?;
        Ok(t)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn stabilizers(&self) -> &[PauliString] {
        &self.stabilizers
    }

    pub fn destabilizers(&self) -> &[PauliString] {
        &self.destabilizers
    }

    pub fn apply_gate(&mut self, g: &CliffordGate) -> Result<()> {
        g.validate(self.n)?;
        for p in self.destabilizers.iter_mut().chain(self.stabilizers.iter_mut()) {
            conjugate(p, g);
        }
        Ok(())
    }

    pub fn apply_circuit(&mut self, gates: &[CliffordGate]) -> Result<()> {
        for g in gates {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    /// Measures `Z_q`, collapsing the state. Returns the outcome bit.
    pub fn measure_z<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<bool> {
        if q >= self.n {
            return Err(Error::Range {
                index: q as u64,
                limit: self.n as u64,
            });
        }
        let outcome = match (0..self.n).find(|&i| self.stabilizers[i].x(q)) {
            Some(p) => {
                let pivot = self.stabilizers[p].clone();
                for i in 0..self.n {
                    if i != p && self.stabilizers[i].x(q) {
                        self.stabilizers[i].mul_assign_unchecked(&pivot);
                    }
                    if self.destabilizers[i].x(q) && i != p {
                        self.destabilizers[i].mul_assign_unchecked(&pivot);
                        self.destabilizers[i].set_phase(0);
                    }
                }
                let bit: bool = rng.gen();
                self.destabilizers[p] = pivot.with_phase(0);
                self.stabilizers[p] = PauliString::single(self.n, q, Pauli1::Z).with_phase(if bit { 2 } else { 0 });
                bit
            }
            None => {
                let mut acc = PauliString::identity(self.n);
                for i in 0..self.n {
                    if self.destabilizers[i].x(q) {
                        acc.mul_assign_unchecked(&self.stabilizers[i]);
                    }
                }
                acc.phase() == 2
            }
        };
        debug_assert!(self.check_invariants().is_ok());
        Ok(outcome)
    }

    /// `tr(P ρ)` for a Hermitian Pauli `P`: `±1` if `±P` stabilizes the state, else 0.
    pub fn expectation_pauli(&self, p: &PauliString) -> Result<i8> {
        check_dim(self.n, p.num_qubits())?;
        if !p.is_hermitian() {
            return Err(Error::Argument(format!(
                "expectation needs a Hermitian Pauli, got phase i^{}",
                p.phase()
            )));
        }
        if self.stabilizers.iter().any(|s| !s.commutes_unchecked(p)) {
            return Ok(0);
        }
        let mut acc = PauliString::identity(self.n);
        for i in 0..self.n {
            if !self.destabilizers[i].commutes_unchecked(p) {
                acc.mul_assign_unchecked(&self.stabilizers[i]);
            }
        }
        // acc = i^k Herm(P) stabilizes, so tr(P rho) = i^{phase(P) - k}
        Ok(if (p.phase() + 4 - acc.phase()) & 3 == 0 { 1 } else { -1 })
    }

    /// Checks the commutation structure and sign restrictions.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.n;
        if self.stabilizers.len() != n || self.destabilizers.len() != n {
            return Err(Error::Validation("tableau row count".into()));
        }
        for i in 0..n {
            if !self.stabilizers[i].is_hermitian() {
                return Err(Error::Validation(format!(
                    "stabilizer {i} has phase i^{}",
                    self.stabilizers[i].phase()
                )));
            }
            for j in 0..n {
                let s = &self.stabilizers[i];
                if j > i && !s.commutes_unchecked(&self.stabilizers[j]) {
                    return Err(Error::Validation(format!("stabilizers {i} and {j} anticommute")));
                }
                if j > i && !self.destabilizers[i].commutes_unchecked(&self.destabilizers[j]) {
                    return Err(Error::Validation(format!("destabilizers {i} and {j} anticommute")));
                }
                let anti = !self.destabilizers[i].commutes_unchecked(&self.stabilizers[j]);
                if anti != (i == j) {
                    return Err(Error::Validation(format!(
                        "destabilizer {i} vs stabilizer {j}: wrong commutation"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A stabilizer state `C|b>` kept as a circuit so that its global phase is defined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerState {
    n: usize,
    input: Vec<bool>,
    circuit: Vec<CliffordGate>,
}

impl StabilizerState {
    pub fn new(n: usize, input: Vec<bool>, circuit: Vec<CliffordGate>) -> Result<Self> {
        check_dim(n, input.len())?;
        for g in &circuit {
            g.validate(n)?;
        }
        Ok(StabilizerState { n, input, circuit })
    }

    pub fn from_circuit(n: usize, circuit: Vec<CliffordGate>) -> Result<Self> {
        Self::new(n, vec![false; n], circuit)
    }

    pub fn basis(bits: Vec<bool>) -> Self {
        StabilizerState {
            n: bits.len(),
            input: bits,
            circuit: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn input(&self) -> &[bool] {
        &self.input
    }

    pub fn circuit(&self) -> &[CliffordGate] {
        &self.circuit
    }

    pub fn tableau(&self) -> StabilizerTableau {
        let mut t = StabilizerTableau::from_zero(self.n);
        let prep: Vec<CliffordGate> = self
            .input
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(q, _)| CliffordGate::X(q))
            .chain(self.circuit.iter().copied())
            .collect();
        t.apply_circuit(&prep).expect("validated at construction");
        t
    }

    /// `<self|other>`, exact.
    pub fn inner_product(&self, other: &StabilizerState) -> Result<StabInnerProduct> {
        check_dim(self.n, other.n)?;
        let mut gates = other.circuit.clone();
        gates.extend(inverse_circuit(&self.circuit));
        let mut ps = PathSum::new(self.n, PathSum::capacity_for(&gates, 0));
        for (q, &b) in other.input.iter().enumerate() {
            ps.set_basis(q, b);
        }
        for g in &gates {
            ps.apply(g);
        }
        Ok(ps.amplitude(&self.input, &[]))
    }
}

/// `<x| C |b>` for a Clifford circuit.
pub fn clifford_amplitude(n: usize, gates: &[CliffordGate], input: &[bool], x: &[bool]) -> Result<StabInnerProduct> {
    check_dim(n, input.len())?;
    check_dim(n, x.len())?;
    for g in gates {
        g.validate(n)?;
    }
    Ok(crate::pathsum::clifford_amplitude(n, gates, input, x))
}

fn random_pauli<R: Rng + ?Sized>(n: usize, from: usize, rng: &mut R) -> PauliString {
    let mut p = PauliString::identity(n);
    for q in from..n {
        p.set_x(q, rng.gen());
        p.set_z(q, rng.gen());
    }
    p
}

/// Clifford circuit `V` on qubits `j..n` with `V P V† = ±X_j`, `V Q V† = ±Z_j`.
fn disentangle(n: usize, j: usize, mut p: PauliString, mut q: PauliString) -> Vec<CliffordGate> {
    let mut gates = Vec::new();
    let mut push = |g: CliffordGate, p: &mut PauliString, q: &mut PauliString| {
        conjugate(p, &g);
        conjugate(q, &g);
        gates.push(g);
    };
    for k in j..n {
        match p.get(k) {
            Pauli1::Z => push(CliffordGate::H(k), &mut p, &mut q),
            Pauli1::Y => push(CliffordGate::Sdg(k), &mut p, &mut q),
            _ => {}
        }
    }
    let a = (j..n).find(|&k| p.x(k)).expect("P is not the identity");
    for k in a + 1..n {
        if p.x(k) {
            push(CliffordGate::CX(a, k), &mut p, &mut q);
        }
    }
    if a != j {
        push(CliffordGate::Swap(a, j), &mut p, &mut q);
    }
    push(CliffordGate::H(j), &mut p, &mut q);
    for k in j + 1..n {
        match q.get(k) {
            Pauli1::Z => push(CliffordGate::H(k), &mut p, &mut q),
            Pauli1::Y => push(CliffordGate::Sdg(k), &mut p, &mut q),
            _ => {}
        }
    }
    for k in j + 1..n {
        if q.x(k) {
            push(CliffordGate::CX(j, k), &mut p, &mut q);
        }
    }
    if q.z(j) {
        push(CliffordGate::Sdg(j), &mut p, &mut q);
    }
    push(CliffordGate::H(j), &mut p, &mut q);
    debug_assert_eq!(p.get(j), Pauli1::X);
    debug_assert_eq!(q.get(j), Pauli1::Z);
    gates
}

/// Uniformly random n-qubit Clifford, as a gate sequence in time order.
///
/// For each qubit `j` an anticommuting pair `(P, Q)` on qubits `j..n` is drawn
/// uniformly, fixing the images of `X_j` and `Z_j`; a uniform Pauli layer
/// then randomises all signs. Every Clifford (mod global phase) arises from
/// exactly one sequence of choices.
pub fn random_clifford<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<CliffordGate> {
    let mut circuit = Vec::new();
    for q in 0..n {
        match (rng.gen::<bool>(), rng.gen::<bool>()) {
            (true, false) => circuit.push(CliffordGate::X(q)),
            (true, true) => circuit.push(CliffordGate::Y(q)),
            (false, true) => circuit.push(CliffordGate::Z(q)),
            (false, false) => {}
        }
    }
    let mut layers = Vec::with_capacity(n);
    for j in 0..n {
        let p = loop {
            let p = random_pauli(n, j, rng);
            if !p.is_identity() {
                break p;
            }
        };
        let q = loop {
            let q = random_pauli(n, j, rng);
            if !q.commutes_unchecked(&p) {
                break q;
            }
        };
        layers.push(inverse_circuit(&disentangle(n, j, p, q)));
    }
    for layer in layers.into_iter().rev() {
        circuit.extend(layer);
    }
    circuit
}

/// Images `(C X_q C†, C Z_q C†)` for every qubit; identifies `C` up to phase.
pub fn clifford_images(n: usize, gates: &[CliffordGate]) -> Result<Vec<PauliString>> {
    let t = StabilizerTableau::from_circuit(n, gates)?;
    Ok(t.destabilizers.into_iter().chain(t.stabilizers).collect())
}

/// The 24 single-qubit Cliffords (mod phase), each as a short H/S word.
pub fn clifford_group_1q() -> Vec<Vec<CliffordGate>> {
    let key = |gates: &[CliffordGate]| clifford_images(1, gates).expect("single qubit");
    let mut seen: HashMap<Vec<PauliString>, ()> = HashMap::new();
    let mut out = Vec::new();
    let mut queue = VecDeque::from([Vec::<CliffordGate>::new()]);
    while let Some(word) = queue.pop_front() {
        if seen.insert(key(&word), ()).is_some() {
            continue;
        }
        for g in [CliffordGate::H(0), CliffordGate::S(0)] {
            let mut next = word.clone();
            next.push(g);
            queue.push_back(next);
        }
        out.push(word);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn single_gate_conjugations() {
        let mut t = StabilizerTableau::from_zero(1);
        t.apply_gate(&CliffordGate::H(0)).unwrap();
        assert_eq!(t.stabilizers()[0], ps("X"));
        t.apply_gate(&CliffordGate::S(0)).unwrap();
        assert_eq!(t.stabilizers()[0], ps("Y"));
        t.apply_gate(&CliffordGate::S(0)).unwrap();
        assert_eq!(t.stabilizers()[0], ps("-X"));
        t.apply_gate(&CliffordGate::Sdg(0)).unwrap();
        assert_eq!(t.stabilizers()[0], ps("Y"));
    }

    #[test]
    fn bell_state_stabilizers() {
        let t = StabilizerTableau::from_circuit(2, &[CliffordGate::H(0), CliffordGate::CX(0, 1)]).unwrap();
        assert_eq!(t.stabilizers()[0], ps("XX"));
        assert_eq!(t.stabilizers()[1], ps("ZZ"));
        assert_eq!(t.expectation_pauli(&ps("XX")).unwrap(), 1);
        assert_eq!(t.expectation_pauli(&ps("YY")).unwrap(), -1);
        assert_eq!(t.expectation_pauli(&ps("XI")).unwrap(), 0);
        assert_eq!(t.expectation_pauli(&ps("-ZZ")).unwrap(), -1);
        assert!(t.expectation_pauli(&ps("+iZZ")).is_err());
    }

    #[test]
    fn zero_state_expectations() {
        let t = StabilizerTableau::from_zero(1);
        assert_eq!(t.expectation_pauli(&ps("Z")).unwrap(), 1);
        assert_eq!(t.expectation_pauli(&ps("X")).unwrap(), 0);
        assert_eq!(t.expectation_pauli(&ps("I")).unwrap(), 1);
    }

    #[test]
    fn gate_out_of_range() {
        let mut t = StabilizerTableau::from_zero(2);
        assert!(matches!(
            t.apply_gate(&CliffordGate::H(2)),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn deterministic_measurement() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut t = StabilizerTableau::from_zero(1);
        let before = t.clone();
        assert!(!t.measure_z(0, &mut rng).unwrap());
        assert_eq!(t, before);
    }

    #[test]
    fn random_measurement_is_fair() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let shots = 10_000;
        let mut ones = 0;
        for _ in 0..shots {
            let mut t = StabilizerTableau::from_circuit(1, &[CliffordGate::H(0)]).unwrap();
            if t.measure_z(0, &mut rng).unwrap() {
                ones += 1;
            }
        }
        let sigma = (shots as f64 * 0.25).sqrt();
        assert!((ones as f64 - shots as f64 / 2.0).abs() < 3.0 * sigma, "{ones}");
    }

    #[test]
    fn bell_measurements_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let mut t = StabilizerTableau::from_circuit(2, &[CliffordGate::H(0), CliffordGate::CX(0, 1)]).unwrap();
            let a = t.measure_z(0, &mut rng).unwrap();
            let b = t.measure_z(1, &mut rng).unwrap();
            assert_eq!(a, b);
            t.check_invariants().unwrap();
        }
    }

    #[test]
    fn measurement_collapses() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let mut t = StabilizerTableau::from_circuit(1, &[CliffordGate::H(0)]).unwrap();
            let a = t.measure_z(0, &mut rng).unwrap();
            assert_eq!(t.measure_z(0, &mut rng).unwrap(), a);
        }
    }

    #[test]
    fn inner_product_examples() {
        let zero = StabilizerState::basis(vec![false]);
        let one = StabilizerState::basis(vec![true]);
        let plus = StabilizerState::from_circuit(1, vec![CliffordGate::H(0)]).unwrap();
        let splus = StabilizerState::from_circuit(1, vec![CliffordGate::H(0), CliffordGate::S(0)]).unwrap();
        assert_eq!(
            zero.inner_product(&zero).unwrap(),
            StabInnerProduct { b: 1, p: 0, m: 0 }
        );
        assert_eq!(
            zero.inner_product(&plus).unwrap(),
            StabInnerProduct { b: 1, p: 1, m: 0 }
        );
        assert_eq!(
            one.inner_product(&splus).unwrap(),
            StabInnerProduct { b: 1, p: 1, m: 2 }
        );
        assert_eq!(zero.inner_product(&one).unwrap().b, 0);
    }

    #[test]
    fn self_overlap_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=6 {
            for _ in 0..20 {
                let s = StabilizerState::from_circuit(n, random_clifford(n, &mut rng)).unwrap();
                assert_eq!(s.inner_product(&s).unwrap(), StabInnerProduct { b: 1, p: 0, m: 0 });
            }
        }
    }

    #[test]
    fn one_qubit_group_has_24_elements() {
        let g = clifford_group_1q();
        assert_eq!(g.len(), 24);
    }

    #[test]
    fn random_clifford_is_uniform_on_one_qubit() {
        let group = clifford_group_1q();
        let index: HashMap<Vec<PauliString>, usize> = group
            .iter()
            .enumerate()
            .map(|(i, w)| (clifford_images(1, w).unwrap(), i))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let draws = 100_000;
        let mut counts = [0usize; 24];
        for _ in 0..draws {
            let c = random_clifford(1, &mut rng);
            counts[index[&clifford_images(1, &c).unwrap()]] += 1;
        }
        let p = 1.0 / 24.0;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for &c in &counts {
            assert!((c as f64 - draws as f64 * p).abs() < 3.0 * sigma + 1.0, "{counts:?}");
        }
    }

    #[test]
    fn random_clifford_orbit_of_z() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 60_000;
        let mut counts: HashMap<PauliString, usize> = HashMap::new();
        for _ in 0..draws {
            let c = random_clifford(1, &mut rng);
            let img = clifford_images(1, &c).unwrap()[1].clone();
            *counts.entry(img).or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        let p = 1.0 / 6.0;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for &c in counts.values() {
            assert!((c as f64 - draws as f64 * p).abs() < 3.0 * sigma);
        }
    }

    #[test]
    fn sampled_tableaux_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..1000 {
            let c = random_clifford(6, &mut rng);
            StabilizerTableau::from_circuit(6, &c)
                .unwrap()
                .check_invariants()
                .unwrap();
        }
    }

    #[test]
    fn two_qubit_sampler_hits_every_symplectic_class() {
        // |Sp(4, F_2)| = 720 classes mod Paulis; 11520 Cliffords with signs.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..200_000 {
            let c = random_clifford(2, &mut rng);
            seen.insert(clifford_images(2, &c).unwrap());
        }
        assert_eq!(seen.len(), 11520);
    }

    #[test]
    fn invariants_along_random_trajectories() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..100 {
            let n = rng.gen_range(1..=6);
            let mut t = StabilizerTableau::from_circuit(n, &random_clifford(n, &mut rng)).unwrap();
            for _ in 0..n {
                let q = rng.gen_range(0..n);
                t.measure_z(q, &mut rng).unwrap();
                t.check_invariants().unwrap();
                t.apply_circuit(&random_clifford(n, &mut rng)).unwrap();
                t.check_invariants().unwrap();
            }
        }
    }
}
