//! Exact statevector and density-matrix simulation, used as ground truth and
//! as the noisy "hardware" the estimators are run against.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::circuit::{CliffordGate, DopedCircuit, Gate};
use crate::error::{check_dim, Error, Result};
use crate::par;
use crate::pauli::{PauliIndex, PauliString};
use crate::Limits;

pub type CMatrix = DMatrix<Complex64>;

const TOL: f64 = 1e-9;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub(crate) fn check_pure_limit(n: usize, limits: &Limits) -> Result<()> {
    if n > limits.dense_pure {
        return Err(Error::Capacity {
            what: "qubits for dense state",
            requested: n,
            limit: limits.dense_pure,
        });
    }
    Ok(())
}

pub(crate) fn check_mixed_limit(n: usize, limits: &Limits) -> Result<()> {
    if n > limits.dense_mixed {
        return Err(Error::Capacity {
            what: "qubits for density matrix",
            requested: n,
            limit: limits.dense_mixed,
        });
    }
    Ok(())
}

fn bits_to_index(bits: &[bool]) -> usize {
    bits.iter()
        .enumerate()
        .fold(0, |acc, (q, &b)| acc | ((b as usize) << q))
}

fn index_to_bits(n: usize, i: usize) -> Vec<bool> {
    (0..n).map(|q| (i >> q) & 1 == 1).collect()
}

/// Applies a single-qubit matrix `[[a, b], [c, d]]` to qubit `q`.
fn apply_1q(v: &mut [Complex64], q: usize, m: [Complex64; 4]) {
    let bit = 1 << q;
    for i in 0..v.len() {
        if i & bit == 0 {
            let (a0, a1) = (v[i], v[i | bit]);
            v[i] = m[0] * a0 + m[1] * a1;
            v[i | bit] = m[2] * a0 + m[3] * a1;
        }
    }
}

fn apply_phase(v: &mut [Complex64], q: usize, phase: Complex64) {
    let bit = 1 << q;
    for (i, a) in v.iter_mut().enumerate() {
        if i & bit != 0 {
            *a *= phase;
        }
    }
}

pub(crate) fn apply_gate_vec(v: &mut [Complex64], g: &Gate) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match *g {
        Gate::T(q) => apply_phase(v, q, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)),
        Gate::Tdg(q) => apply_phase(v, q, Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)),
        Gate::Clifford(cg) => match cg {
            CliffordGate::H(q) => apply_1q(v, q, [c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]),
            CliffordGate::S(q) => apply_phase(v, q, c(0.0, 1.0)),
            CliffordGate::Sdg(q) => apply_phase(v, q, c(0.0, -1.0)),
            CliffordGate::Z(q) => apply_phase(v, q, c(-1.0, 0.0)),
            CliffordGate::X(q) => apply_1q(v, q, [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]),
            CliffordGate::Y(q) => apply_1q(v, q, [c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]),
            CliffordGate::CX(ct, t) => {
                let (cb, tb) = (1 << ct, 1 << t);
                for i in 0..v.len() {
                    if i & cb != 0 && i & tb == 0 {
                        v.swap(i, i | tb);
                    }
                }
            }
            CliffordGate::CZ(a, b) => {
                let mask = (1 << a) | (1 << b);
                for (i, x) in v.iter_mut().enumerate() {
                    if i & mask == mask {
                        *x = -*x;
                    }
                }
            }
            CliffordGate::Swap(a, b) => {
                let (ab, bb) = (1 << a, 1 << b);
                for i in 0..v.len() {
                    if i & ab != 0 && i & bb == 0 {
                        v.swap(i, (i ^ ab) | bb);
                    }
                }
            }
        },
    }
}

/// `P|v>` for a Pauli including its phase.
fn apply_pauli_vec(v: &[Complex64], p: &PauliString) -> Vec<Complex64> {
    let (x, z) = (p.x_mask() as usize, p.z_mask() as usize);
    let global = Complex64::i().powu(((p.phase() as u32) + (x & z).count_ones()) % 4);
    let mut out = vec![c(0.0, 0.0); v.len()];
    for (j, &a) in v.iter().enumerate() {
        let sign = if (z & j).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        out[j ^ x] = global * sign * a;
    }
    out
}

/// In-place fast Walsh–Hadamard transform.
fn walsh_hadamard(w: &mut [Complex64]) {
    let mut h = 1;
    while h < w.len() {
        for i in (0..w.len()).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (w[j], w[j + h]);
                w[j] = a + b;
                w[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// `tr(P_i A)` for every Pauli index, with `entry(j, k)` returning `A[j, k]`.
/// For fixed `x` the traces over all `z` are one Walsh–Hadamard transform of
/// `A[j, j ^ x]`.
fn pauli_traces<F>(n: usize, entry: F) -> Vec<Complex64>
where
    F: Fn(usize, usize) -> Complex64 + Sync,
{
    let d = 1usize << n;
    let rows: Vec<Vec<Complex64>> = par::map(d, |x| {
        let mut w: Vec<Complex64> = (0..d).map(|j| entry(j, j ^ x)).collect();
        walsh_hadamard(&mut w);
        w
    });
    let mut out = vec![c(0.0, 0.0); d * d];
    for (x, w) in rows.into_iter().enumerate() {
        for (z, val) in w.into_iter().enumerate() {
            let ph = Complex64::i().powu((x & z).count_ones() % 4);
            let idx = PauliIndex::from_masks(n, x as u64, z as u64).0 as usize;
            out[idx] = ph * val;
        }
    }
    out
}

/// A pure state on `n` qubits; basis index bit `q` is qubit `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    n: usize,
    amps: Vec<Complex64>,
}

impl DenseState {
    pub fn zero(n: usize) -> Self {
        Self::basis(&vec![false; n])
    }

    pub fn basis(bits: &[bool]) -> Self {
        let n = bits.len();
        let mut amps = vec![c(0.0, 0.0); 1 << n];
        amps[bits_to_index(bits)] = c(1.0, 0.0);
        DenseState { n, amps }
    }

    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_dim(1 << n, amps.len())?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > TOL {
            return Err(Error::Argument(format!("state norm² is {norm}, expected 1")));
        }
        Ok(DenseState { n, amps })
    }

    /// Haar-random pure state.
    pub fn haar_random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut amps: Vec<Complex64> = (0..1 << n)
            .map(|_| c(StandardNormal.sample(rng), StandardNormal.sample(rng)))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        DenseState { n, amps }
    }

    /// `U|input>` for a Clifford+T circuit.
    pub fn simulate(circuit: &DopedCircuit, input: &[bool], limits: &Limits) -> Result<Self> {
        let n = circuit.num_qubits();
        check_dim(n, input.len())?;
        check_pure_limit(n, limits)?;
        let mut s = Self::basis(input);
        s.apply_circuit(circuit.gates());
        Ok(s)
    }

    pub fn simulate_clifford(n: usize, gates: &[CliffordGate], input: &[bool]) -> Result<Self> {
        let circuit = DopedCircuit::from_clifford(n, gates)?;
        Self::simulate(&circuit, input, &Limits::default())
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, bits: &[bool]) -> Complex64 {
        self.amps[bits_to_index(bits)]
    }

    pub fn apply_gate(&mut self, g: &Gate) {
        apply_gate_vec(&mut self.amps, g);
    }

    pub fn apply_circuit(&mut self, gates: &[Gate]) {
        for g in gates {
            self.apply_gate(g);
        }
    }

    pub fn apply_clifford(&mut self, gates: &[CliffordGate]) {
        for g in gates {
            self.apply_gate(&Gate::Clifford(*g));
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &DenseState) -> Result<Complex64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// `self ⊗ other` with `self` on the low qubits.
    pub fn tensor(&self, other: &DenseState) -> DenseState {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for b in &other.amps {
            for a in &self.amps {
                amps.push(a * b);
            }
        }
        DenseState {
            n: self.n + other.n,
            amps,
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        let v = nalgebra::DVector::from_column_slice(&self.amps);
        DensityMatrix {
            n: self.n,
            m: &v * v.adjoint(),
        }
    }

    /// `<psi|P|psi>` for a Hermitian Pauli.
    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        check_dim(self.n, p.num_qubits())?;
        let pv = apply_pauli_vec(&self.amps, p);
        Ok(self
            .amps
            .iter()
            .zip(&pv)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .re)
    }

    /// `tr(P_i psi)` for every Pauli index `i`.
    pub fn pauli_expectations_all(&self, limits: &Limits) -> Result<Vec<f64>> {
        check_pure_limit(self.n, limits)?;
        let a = &self.amps;
        Ok(pauli_traces(self.n, |j, jx| a[j] * a[jx].conj())
            .into_iter()
            .map(|v| v.re)
            .collect())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Samples a computational-basis string with the Born rule.
    pub fn measure_computational<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<bool> {
        index_to_bits(self.n, sample_index(&self.probabilities(), rng))
    }
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let mut r = rng.gen::<f64>() * total;
    for (i, &p) in probs.iter().enumerate() {
        if r < p {
            return i;
        }
        r -= p;
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Dense unitary of a circuit: column `j` is `U|j>`.
pub fn unitary_matrix(circuit: &DopedCircuit, limits: &Limits) -> Result<CMatrix> {
    let n = circuit.num_qubits();
    check_mixed_limit(n, limits)?;
    let d = 1 << n;
    let mut u = CMatrix::zeros(d, d);
    for j in 0..d {
        let s = DenseState::simulate(circuit, &index_to_bits(n, j), limits)?;
        u.column_mut(j).copy_from_slice(s.amplitudes());
    }
    Ok(u)
}

/// Haar-random unitary on `n` qubits (QR of a Ginibre matrix with phase fix).
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let d = 1 << n;
    let g = CMatrix::from_fn(d, d, |_, _| c(StandardNormal.sample(rng), StandardNormal.sample(rng)));
    let (mut q, r) = g.qr().unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            c(1.0, 0.0)
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Matrix of a Pauli string including its phase.
pub fn pauli_matrix(p: &PauliString) -> CMatrix {
    let n = p.num_qubits();
    let d = 1 << n;
    let mut m = CMatrix::zeros(d, d);
    for j in 0..d {
        let mut e = vec![c(0.0, 0.0); d];
        e[j] = c(1.0, 0.0);
        let col = apply_pauli_vec(&e, p);
        m.column_mut(j).copy_from_slice(&col);
    }
    m
}

/// `tr(P_i A)` for every Pauli index `i`, for an arbitrary `2^n x 2^n` matrix.
pub fn pauli_coefficients(a: &CMatrix) -> Result<Vec<Complex64>> {
    let d = a.nrows();
    if !d.is_power_of_two() || a.ncols() != d {
        return Err(Error::Argument(format!(
            "expected a 2^n square matrix, got {}x{}",
            d,
            a.ncols()
        )));
    }
    let n = d.trailing_zeros() as usize;
    Ok(pauli_traces(n, |j, jx| a[(j, jx)]))
}

/// A mixed state on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    m: CMatrix,
}

impl DensityMatrix {
    pub fn from_matrix(n: usize, m: CMatrix) -> Result<Self> {
        check_dim(1 << n, m.nrows())?;
        check_dim(1 << n, m.ncols())?;
        let rho = DensityMatrix { n, m };
        rho.check_invariants()?;
        Ok(rho)
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let d = 1 << n;
        DensityMatrix {
            n,
            m: CMatrix::identity(d, d) / c(d as f64, 0.0),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    pub fn purity(&self) -> f64 {
        self.m.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `tr(self · other)`.
    pub fn overlap(&self, other: &DensityMatrix) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        // tr(AB) = sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij) for Hermitian B
        Ok(self
            .m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| a * b.conj())
            .sum::<Complex64>()
            .re)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.m
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// Unit trace, Hermitian and positive within `1e-9`.
    pub fn check_invariants(&self) -> Result<()> {
        if (self.trace() - 1.0).abs() > TOL {
            return Err(Error::Validation(format!("trace {} != 1", self.trace())));
        }
        let herm = (&self.m - self.m.adjoint())
            .iter()
            .map(|a| a.norm())
            .fold(0.0, f64::max);
        if herm > TOL {
            return Err(Error::Validation(format!("not Hermitian (deviation {herm:e})")));
        }
        let min = self.min_eigenvalue();
        if min < -TOL {
            return Err(Error::Validation(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// `U ρ U†` for a gate sequence.
    pub fn apply_circuit(&mut self, gates: &[Gate]) {
        let d = self.dim();
        for g in gates {
            for j in 0..d {
                apply_gate_vec(&mut self.m.as_mut_slice()[j * d..(j + 1) * d], g);
            }
            self.m.adjoint_mut();
            for j in 0..d {
                apply_gate_vec(&mut self.m.as_mut_slice()[j * d..(j + 1) * d], g);
            }
            self.m.adjoint_mut();
        }
    }

    pub fn apply_clifford(&mut self, gates: &[CliffordGate]) {
        let gates: Vec<Gate> = gates.iter().copied().map(Gate::Clifford).collect();
        self.apply_circuit(&gates);
    }

    pub fn apply_unitary(&mut self, u: &CMatrix) -> Result<()> {
        check_dim(self.dim(), u.nrows())?;
        self.m = u * &self.m * u.adjoint();
        Ok(())
    }

    pub fn apply_channel(&mut self, ch: &KrausChannel) -> Result<()> {
        check_dim(self.dim(), ch.dim())?;
        self.m = ch.apply_matrix(&self.m);
        Ok(())
    }

    /// `P ρ P†` for a phase-free Pauli given by masks.
    fn pauli_conjugated(&self, x: usize, z: usize) -> CMatrix {
        let d = self.dim();
        CMatrix::from_fn(d, d, |i, j| {
            let (ii, jj) = (i ^ x, j ^ x);
            let s = ((z & ii).count_ones() + (z & jj).count_ones()) % 2;
            let v = self.m[(ii, jj)];
            if s == 1 {
                -v
            } else {
                v
            }
        })
    }

    /// `tr(P ρ)` for a Hermitian Pauli.
    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        check_dim(self.n, p.num_qubits())?;
        if !p.is_hermitian() {
            return Err(Error::Argument("expectation of a non-Hermitian Pauli".into()));
        }
        let (x, z) = (p.x_mask() as usize, p.z_mask() as usize);
        let mut acc = c(0.0, 0.0);
        for j in 0..self.dim() {
            let v = self.m[(j, j ^ x)];
            acc += if (z & j).count_ones() % 2 == 1 { -v } else { v };
        }
        let ph = Complex64::i().powu(((x & z).count_ones() + p.phase() as u32) % 4);
        Ok((ph * acc).re)
    }

    pub fn pauli_expectations_all(&self, limits: &Limits) -> Result<Vec<f64>> {
        check_mixed_limit(self.n, limits)?;
        let m = &self.m;
        Ok(pauli_traces(self.n, |j, jx| m[(j, jx)])
            .into_iter()
            .map(|v| v.re)
            .collect())
    }

    /// One projective measurement of `P`, returning `±1`.
    pub fn one_shot_pauli<R: Rng + ?Sized>(&self, p: &PauliString, rng: &mut R) -> Result<i8> {
        let e = self.expectation(p)?.clamp(-1.0, 1.0);
        Ok(if rng.gen::<f64>() < (1.0 + e) / 2.0 { 1 } else { -1 })
    }

    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.m[(i, i)].re.max(0.0)).collect()
    }

    pub fn measure_computational<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<bool> {
        index_to_bits(self.n, sample_index(&self.probabilities(), rng))
    }
}

/// `<psi| ρ |psi>`, clamped to `[0, 1]`.
pub fn fidelity(pure: &DenseState, mixed: &DensityMatrix) -> Result<f64> {
    check_dim(pure.dim(), mixed.dim())?;
    let v = nalgebra::DVector::from_column_slice(pure.amplitudes());
    let f = (v.adjoint() * &mixed.m * &v)[(0, 0)].re;
    Ok(f.clamp(0.0, 1.0))
}

/// Hilbert–Schmidt distance with the quantities it is built from.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TwoNormDistance {
    pub distance: f64,
    pub purity: f64,
    pub purity_tilde: f64,
    /// `tr(ρ ρ~) / Pur(ρ)`.
    pub phi: f64,
}

pub fn two_norm_distance(rho: &DensityMatrix, rho_tilde: &DensityMatrix) -> Result<TwoNormDistance> {
    check_dim(rho.dim(), rho_tilde.dim())?;
    let purity = rho.purity();
    if purity <= 0.0 {
        return Err(Error::Argument("reference state has zero purity".into()));
    }
    let purity_tilde = rho_tilde.purity();
    let phi = rho.overlap(rho_tilde)? / purity;
    let distance = purity.sqrt() * (1.0 + purity_tilde / purity - 2.0 * phi).max(0.0).sqrt();
    Ok(TwoNormDistance {
        distance,
        purity,
        purity_tilde,
        phi,
    })
}

/// A CPTP map given by Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    ops: Vec<CMatrix>,
}

impl KrausChannel {
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::Argument("channel needs at least one Kraus operator".into()))?;
        let d = first.nrows();
        let mut sum = CMatrix::zeros(d, d);
        for a in &ops {
            if a.nrows() != d || a.ncols() != d {
                return Err(Error::Argument(format!(
                    "Kraus operator of shape {}x{}, expected {d}x{d}",
                    a.nrows(),
                    a.ncols()
                )));
            }
            sum += a.adjoint() * a;
        }
        let dev = (sum - CMatrix::identity(d, d))
            .iter()
            .map(|a| a.norm())
            .fold(0.0, f64::max);
        if dev > TOL {
            return Err(Error::Argument(format!(
                "Kraus operators are not trace preserving (deviation {dev:e})"
            )));
        }
        Ok(KrausChannel { ops })
    }

    pub fn identity(n: usize) -> Self {
        let d = 1 << n;
        KrausChannel {
            ops: vec![CMatrix::identity(d, d)],
        }
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.ops
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &KrausChannel) -> Result<KrausChannel> {
        check_dim(self.dim(), other.dim())?;
        let mut ops = Vec::with_capacity(self.ops.len() * other.ops.len());
        for b in &other.ops {
            for a in &self.ops {
                ops.push(b * a);
            }
        }
        Ok(KrausChannel { ops })
    }

    pub fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
        let d = self.dim();
        let mut out = CMatrix::zeros(d, d);
        for a in &self.ops {
            out += a * m * a.adjoint();
        }
        out
    }
}

/// Noise knobs for the simulated hardware.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    None,
    /// `ρ -> (1-p) ρ + p I/d`.
    GlobalDepolarizing {
        p: f64,
    },
    /// Single-qubit depolarizing with strength `p` on every qubit.
    LocalDepolarizing {
        p: f64,
    },
    /// `exp(-i θ Z/2)` on every qubit.
    CoherentOverrotation {
        theta: f64,
    },
}

impl std::str::FromStr for NoiseModel {
    type Err = Error;

    /// Parses `none`, `global:P`, `local:P` or `overrotation:THETA`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, value) = match s.split_once(':') {
            Some((k, v)) => (k.trim(), Some(v.trim())),
            None => (s.trim(), None),
        };
        let number = || -> Result<f64> {
            let v = value.ok_or_else(|| Error::Parse(format!("noise {kind:?} needs a value, e.g. {kind}:0.1")))?;
            v.parse()
                .map_err(|_| Error::Parse(format!("invalid noise strength {v:?}")))
        };
        let noise = match kind.to_ascii_lowercase().as_str() {
            "none" => NoiseModel::None,
            "global" => NoiseModel::GlobalDepolarizing { p: number()? },
            "local" => NoiseModel::LocalDepolarizing { p: number()? },
            "overrotation" => NoiseModel::CoherentOverrotation { theta: number()? },
            other => return Err(Error::Parse(format!("unknown noise model {other:?}"))),
        };
        noise.validate()?;
        Ok(noise)
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::GlobalDepolarizing { p } | NoiseModel::LocalDepolarizing { p } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Argument(format!("depolarizing strength {p} outside [0, 1]")));
                }
            }
            NoiseModel::CoherentOverrotation { theta } => {
                if !theta.is_finite() {
                    return Err(Error::Argument("overrotation angle must be finite".into()));
                }
            }
            NoiseModel::None => {}
        }
        Ok(())
    }

    /// Explicit Kraus form on `n` qubits.
    pub fn kraus(&self, n: usize) -> Result<KrausChannel> {
        self.validate()?;
        let d = 1usize << n;
        let scaled = |p: &PauliString, w: f64| pauli_matrix(p) * c(w.sqrt(), 0.0);
        match *self {
            NoiseModel::None => Ok(KrausChannel::identity(n)),
            NoiseModel::GlobalDepolarizing { p } => {
                let dd = (d * d) as f64;
                let mut ops = Vec::with_capacity(d * d);
                for i in 0..(d * d) as u64 {
                    let pauli = PauliString::from_index(PauliIndex(i), n)?;
                    let w = if i == 0 { 1.0 - p + p / dd } else { p / dd };
                    ops.push(scaled(&pauli, w));
                }
                KrausChannel::new(ops)
            }
            NoiseModel::LocalDepolarizing { p } => {
                let mut ch = KrausChannel::identity(n);
                for q in 0..n {
                    let ops = (0..4u64)
                        .map(|code| {
                            let pauli = PauliString::single(n, q, crate::pauli::Pauli1::from_code(code));
                            scaled(&pauli, if code == 0 { 1.0 - 3.0 * p / 4.0 } else { p / 4.0 })
                        })
                        .collect();
                    ch = ch.then(&KrausChannel::new(ops)?)?;
                }
                Ok(ch)
            }
            NoiseModel::CoherentOverrotation { theta } => {
                let u = CMatrix::from_fn(d, d, |i, j| {
                    if i == j {
                        Complex64::from_polar(1.0, -theta / 2.0 * z_sum(n, i))
                    } else {
                        c(0.0, 0.0)
                    }
                });
                KrausChannel::unitary(u)
            }
        }
    }

    /// Applies the noise without building Kraus operators.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.validate()?;
        let n = rho.n;
        let d = rho.dim();
        let m = match *self {
            NoiseModel::None => rho.m.clone(),
            NoiseModel::GlobalDepolarizing { p } => {
                &rho.m * c(1.0 - p, 0.0) + CMatrix::identity(d, d) * c(p / d as f64, 0.0)
            }
            NoiseModel::LocalDepolarizing { p } => {
                let mut cur = rho.clone();
                for q in 0..n {
                    let b = 1usize << q;
                    let mut next = &cur.m * c(1.0 - 3.0 * p / 4.0, 0.0);
                    for (x, z) in [(b, 0), (b, b), (0, b)] {
                        next += cur.pauli_conjugated(x, z) * c(p / 4.0, 0.0);
                    }
                    cur.m = next;
                }
                cur.m
            }
            NoiseModel::CoherentOverrotation { theta } => CMatrix::from_fn(d, d, |i, j| {
                rho.m[(i, j)] * Complex64::from_polar(1.0, -theta / 2.0 * (z_sum(n, i) - z_sum(n, j)))
            }),
        };
        Ok(DensityMatrix { n, m })
    }
}

/// `sum_q (-1)^{b_q}` for basis index `i`.
fn z_sum(n: usize, i: usize) -> f64 {
    n as f64 - 2.0 * (i.count_ones() as f64)
}
