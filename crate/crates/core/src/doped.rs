//! Strong simulation of Clifford+T circuits through T-gadgets.
//!
//! Every T on qubit `i` is replaced by `CX(i, n+k)` onto a fresh ancilla
//! prepared in `|T> = (|0> + e^{i pi/4}|1>)/sqrt2` and postselected on `|0>`.
//! Expanding `|T>^{⊗t}` over computational strings `y` gives
//!
//! ```text
//!   <x|U|0^n> = sum_y e^{i pi (s·y)/4} <x,0^t| C_U |0^n,y>
//! ```
//!
//! with `s_k = +1` for T and `-1` for T†; the `2^{-t/2}` of the expansion
//! cancels the `2^{t/2}` of postselection.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::circuit::{CliffordGate, DopedCircuit, Gate};
use crate::error::{check_dim, Error, Result};
use crate::par;
use crate::pathsum::PathSum;
use crate::stab::random_clifford;
use crate::Limits;

/// Where a gadget came from in the original circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GadgetInfo {
    /// Position of the T gate in the original gate list.
    pub gate_index: usize,
    pub qubit: usize,
    pub dagger: bool,
}

/// The `(n+t)`-qubit Clifford circuit with ancilla `n+k` serving the `k`-th T.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetizedCircuit {
    n: usize,
    gates: Vec<CliffordGate>,
    gadgets: Vec<GadgetInfo>,
}

impl GadgetizedCircuit {
    pub fn data_qubits(&self) -> usize {
        self.n
    }

    pub fn num_qubits(&self) -> usize {
        self.n + self.gadgets.len()
    }

    pub fn t_count(&self) -> usize {
        self.gadgets.len()
    }

    pub fn gates(&self) -> &[CliffordGate] {
        &self.gates
    }

    pub fn gadgets(&self) -> &[GadgetInfo] {
        &self.gadgets
    }
}

pub fn gadgetize(u: &DopedCircuit) -> GadgetizedCircuit {
    let n = u.num_qubits();
    let mut gates = Vec::with_capacity(u.gates().len());
    let mut gadgets = Vec::new();
    for (i, g) in u.gates().iter().enumerate() {
        match *g {
            Gate::Clifford(c) => gates.push(c),
            Gate::T(q) | Gate::Tdg(q) => {
                gates.push(CliffordGate::CX(q, n + gadgets.len()));
                gadgets.push(GadgetInfo {
                    gate_index: i,
                    qubit: q,
                    dagger: matches!(g, Gate::Tdg(_)),
                });
            }
        }
    }
    GadgetizedCircuit { n, gates, gadgets }
}

/// Classical work spent on one evaluation, under a unit-cost model in which
/// one stabilizer overlap on `m` qubits costs `m^3`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CostLedger {
    pub overlaps: u64,
    pub terms: u64,
    pub n_cl: u64,
}

impl CostLedger {
    pub fn for_terms(qubits: usize, t: usize) -> Self {
        let terms = 1u64 << t;
        CostLedger {
            overlaps: terms,
            terms,
            n_cl: terms * (qubits as u64).pow(3),
        }
    }

    pub fn add(&mut self, other: &CostLedger) {
        self.overlaps += other.overlaps;
        self.terms += other.terms;
        self.n_cl += other.n_cl;
    }
}

/// `2^{-p/2} sum_k counts[k] e^{i pi k/4}`: an exact amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExactSum {
    pub p: u32,
    pub counts: [i64; 8],
}

impl ExactSum {
    fn reduced(&self) -> (i64, i64, i64, i64) {
        let c = &self.counts;
        (c[0] - c[4], c[2] - c[6], c[1] - c[5], c[3] - c[7])
    }

    pub fn to_complex(&self) -> Complex64 {
        let (a, b, c, d) = self.reduced();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let scale = 2f64.powf(-(self.p as f64) / 2.0);
        Complex64::new(a as f64 + (c - d) as f64 * r, b as f64 + (c + d) as f64 * r) * scale
    }

    /// `|amplitude|^2`, using integer arithmetic up to one factor of sqrt2.
    pub fn norm_sqr(&self) -> f64 {
        let (a, b, c, d) = self.reduced();
        let rational = (a * a + b * b + c * c + d * d) as f64;
        let irrational = (a * (c - d) + b * (c + d)) as f64;
        (rational + std::f64::consts::SQRT_2 * irrational) * 2f64.powi(-(self.p as i32))
    }
}

pub(crate) fn check_t(t: usize, limits: &Limits) -> Result<()> {
    if t > limits.t_max {
        return Err(Error::Capacity {
            what: "T-count",
            requested: t,
            limit: limits.t_max,
        });
    }
    Ok(())
}

const CHUNK: u64 = 1024;

/// Builds the path sum for `C_U` with symbolic ancilla inputs.
fn prepare(g: &GadgetizedCircuit, extra: &[CliffordGate]) -> (PathSum, Vec<usize>) {
    let t = g.t_count();
    let mut ps = PathSum::new(
        g.num_qubits(),
        PathSum::capacity_for(&g.gates, t) + PathSum::capacity_for(extra, 0),
    );
    let ys: Vec<usize> = (0..t).map(|k| ps.set_input_var(g.n + k)).collect();
    for c in g.gates.iter().chain(extra) {
        ps.apply(c);
    }
    (ps, ys)
}

/// `<x|U|0^n>` as an exact sum of `2^t` stabilizer overlaps.
///
/// Path variables other than the ancilla inputs are eliminated once; the
/// overlap `<x,0^t|C_U|0^n,y>` for each `y` is then read off the remaining
/// quadratic form, so every term is still evaluated individually.
pub fn outcome_amplitude_with_clifford(
    u: &DopedCircuit,
    c: &[CliffordGate],
    x: &[bool],
    limits: &Limits,
) -> Result<(ExactSum, CostLedger)> {
    let n = u.num_qubits();
    check_dim(n, x.len())?;
    let t = u.t_count();
    check_t(t, limits)?;
    for g in c {
        g.validate(n)?;
    }
    let g = gadgetize(u);
    let (ps, ys) = prepare(&g, c);
    let mut out = x.to_vec();
    out.resize(n + t, false);
    let reduced = ps.reduce(&out, &[], &ys);
    let signs: u64 = g
        .gadgets
        .iter()
        .enumerate()
        .filter(|(_, info)| info.dagger)
        .fold(0, |m, (k, _)| m | (1 << k));
    let total = 1u64 << t;
    let chunks = total.div_ceil(CHUNK) as usize;
    let partial = par::map(chunks, |ci| {
        let mut counts = [0i64; 8];
        let lo = ci as u64 * CHUNK;
        for y in lo..(lo + CHUNK).min(total) {
            if let Some(m) = reduced.phase_at(y) {
                let plus = (y & !signs).count_ones() as i64;
                let minus = (y & signs).count_ones() as i64;
                counts[((m as i64 + plus - minus).rem_euclid(8)) as usize] += 1;
            }
        }
        counts
    });
    let mut counts = [0i64; 8];
    for part in partial {
        for k in 0..8 {
            counts[k] += part[k];
        }
    }
    Ok((
        ExactSum {
            p: reduced.half,
            counts,
        },
        CostLedger::for_terms(n + t, t),
    ))
}

/// `|<x|U|0^n>|^2`.
pub fn outcome_probability(u: &DopedCircuit, x: &[bool], limits: &Limits) -> Result<(f64, CostLedger)> {
    outcome_probability_with_clifford(u, &[], x, limits)
}

/// `|<x|C U|0^n>|^2` for an extra Clifford `C` applied after `U`.
pub fn outcome_probability_with_clifford(
    u: &DopedCircuit,
    c: &[CliffordGate],
    x: &[bool],
    limits: &Limits,
) -> Result<(f64, CostLedger)> {
    let (amp, ledger) = outcome_amplitude_with_clifford(u, c, x, limits)?;
    Ok((amp.norm_sqr(), ledger))
}

/// Reference evaluation: one independent overlap computation per `y`.
pub fn outcome_probability_naive(u: &DopedCircuit, x: &[bool], limits: &Limits) -> Result<f64> {
    let n = u.num_qubits();
    check_dim(n, x.len())?;
    let t = u.t_count();
    check_t(t, limits)?;
    let g = gadgetize(u);
    let (ps, ys) = prepare(&g, &[]);
    let mut out = x.to_vec();
    out.resize(n + t, false);
    let mut sum = Complex64::new(0.0, 0.0);
    for y in 0..1u64 << t {
        let fixes: Vec<(usize, bool)> = ys.iter().enumerate().map(|(k, &v)| (v, (y >> k) & 1 == 1)).collect();
        let overlap = ps.amplitude(&out, &fixes).to_complex();
        let angle: f64 = g
            .gadgets
            .iter()
            .enumerate()
            .filter(|(k, _)| (y >> k) & 1 == 1)
            .map(|(_, info)| if info.dagger { -1.0 } else { 1.0 })
            .sum::<f64>()
            * std::f64::consts::FRAC_PI_4;
        sum += Complex64::from_polar(1.0, angle) * overlap;
    }
    Ok(sum.norm_sqr())
}

fn random_clifford_gate<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CliffordGate {
    let two = n >= 2 && rng.gen_bool(1.0 / 3.0);
    if two {
        let a = rng.gen_range(0..n);
        let mut b = rng.gen_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        match rng.gen_range(0..3) {
            0 => CliffordGate::CX(a, b),
            1 => CliffordGate::CZ(a, b),
            _ => CliffordGate::Swap(a, b),
        }
    } else {
        let q = rng.gen_range(0..n);
        match rng.gen_range(0..6) {
            0 => CliffordGate::H(q),
            1 => CliffordGate::S(q),
            2 => CliffordGate::Sdg(q),
            3 => CliffordGate::X(q),
            4 => CliffordGate::Y(q),
            _ => CliffordGate::Z(q),
        }
    }
}

/// `num_gates` random elementary gates, `t` of which are T or T†.
pub fn random_doped_circuit<R: Rng + ?Sized>(n: usize, num_gates: usize, t: usize, rng: &mut R) -> DopedCircuit {
    assert!(t <= num_gates, "more T gates than gates");
    let t_slots = rand::seq::index::sample(rng, num_gates, t);
    let mut is_t = vec![false; num_gates];
    for i in t_slots.iter() {
        is_t[i] = true;
    }
    let gates = is_t
        .into_iter()
        .map(|t| {
            if t {
                let q = rng.gen_range(0..n);
                if rng.gen() {
                    Gate::T(q)
                } else {
                    Gate::Tdg(q)
                }
            } else {
                Gate::Clifford(random_clifford_gate(n, rng))
            }
        })
        .collect();
    DopedCircuit::new(n, gates).expect("generated gates are in range")
}

/// `C_t T C_{t-1} ... T C_0` with uniform Cliffords and T on uniform qubits.
pub fn random_t_doped<R: Rng + ?Sized>(n: usize, t: usize, rng: &mut R) -> DopedCircuit {
    let mut gates: Vec<Gate> = random_clifford(n, rng).into_iter().map(Gate::Clifford).collect();
    for _ in 0..t {
        gates.push(Gate::T(rng.gen_range(0..n)));
        gates.extend(random_clifford(n, rng).into_iter().map(Gate::Clifford));
    }
    DopedCircuit::new(n, gates).expect("generated gates are in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::CliffordGate::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn circ(n: usize, gates: Vec<Gate>) -> DopedCircuit {
        DopedCircuit::new(n, gates).unwrap()
    }

    fn prob(u: &DopedCircuit, x: &[bool]) -> f64 {
        outcome_probability(u, x, &Limits::default()).unwrap().0
    }

    #[test]
    fn gadgetize_examples() {
        let plain = circ(2, vec![H(0).into(), CX(0, 1).into()]);
        let g = gadgetize(&plain);
        assert_eq!(g.num_qubits(), 2);
        assert_eq!(g.gates(), &[H(0), CX(0, 1)]);

        let single = gadgetize(&circ(1, vec![Gate::T(0)]));
        assert_eq!(single.num_qubits(), 2);
        assert_eq!(single.gates(), &[CX(0, 1)]);

        let u = circ(2, vec![H(0).into(), Gate::T(1), S(0).into(), Gate::Tdg(0)]);
        let g = gadgetize(&u);
        assert_eq!(g.gates(), &[H(0), CX(1, 2), S(0), CX(0, 3)]);
        assert_eq!(g.gates().len(), u.gates().len());
        assert!(g.gadgets()[1].dagger && g.gadgets()[1].gate_index == 3);
    }

    #[test]
    fn probability_examples() {
        assert!((prob(&circ(1, vec![Gate::T(0)]), &[false]) - 1.0).abs() < 1e-15);
        assert!((prob(&circ(1, vec![H(0).into()]), &[false]) - 0.5).abs() < 1e-15);
        let hth = circ(1, vec![H(0).into(), Gate::T(0), H(0).into()]);
        let expect = (std::f64::consts::PI / 8.0).cos().powi(2);
        assert!((prob(&hth, &[false]) - expect).abs() < 1e-12);
        assert!((expect - 0.8535534).abs() < 1e-7);
    }

    #[test]
    fn ledger_counts_terms() {
        let u = circ(2, vec![H(0).into(), Gate::T(0), Gate::T(1), Gate::Tdg(0)]);
        let (_, ledger) = outcome_probability(&u, &[false, true], &Limits::default()).unwrap();
        assert_eq!(ledger.terms, 8);
        assert_eq!(ledger.overlaps, 8);
        assert_eq!(ledger.n_cl, 8 * 125);
        let (_, ledger) =
            outcome_probability(&circ(2, vec![H(0).into()]), &[false, false], &Limits::default()).unwrap();
        assert_eq!(ledger.terms, 1);
    }

    #[test]
    fn t_limit() {
        let u = circ(1, vec![Gate::T(0); 17]);
        assert!(matches!(
            outcome_probability(&u, &[false], &Limits::default()),
            Err(Error::Capacity {
                requested: 17,
                limit: 16,
                ..
            })
        ));
    }

    #[test]
    fn probabilities_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=4 {
            for _ in 0..10 {
                let t = rng.gen_range(0..=4);
                let u = random_doped_circuit(n, 25, t, &mut rng);
                let total: f64 = (0..1usize << n)
                    .map(|i| prob(&u, &(0..n).map(|q| (i >> q) & 1 == 1).collect::<Vec<_>>()))
                    .sum();
                assert!((total - 1.0).abs() < 1e-8, "n={n} t={t} total={total}");
            }
        }
    }

    #[test]
    fn shared_elimination_matches_naive_terms() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let n = rng.gen_range(1..=4);
            let t = rng.gen_range(0..=5);
            let u = random_doped_circuit(n, 20, t, &mut rng);
            let x: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
            let a = prob(&u, &x);
            let b = outcome_probability_naive(&u, &x, &Limits::default()).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn s_as_two_t_gates() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..30 {
            let n = rng.gen_range(1..=3);
            let u = random_doped_circuit(n, 15, 2, &mut rng);
            let q = rng.gen_range(0..n);
            let with_s = u.then_clifford(&[S(q)]).unwrap();
            let mut with_tt = u.clone();
            with_tt.push(Gate::T(q)).unwrap();
            with_tt.push(Gate::T(q)).unwrap();
            let h: Vec<CliffordGate> = (0..n).map(H).collect();
            let x: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
            let a = outcome_probability_with_clifford(&with_s, &h, &x, &Limits::default())
                .unwrap()
                .0;
            let b = outcome_probability_with_clifford(&with_tt, &h, &x, &Limits::default())
                .unwrap()
                .0;
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_clifford_changes_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let u = random_doped_circuit(3, 20, 3, &mut rng);
        let x = [true, false, true];
        let a = outcome_probability(&u, &x, &Limits::default()).unwrap();
        let b = outcome_probability_with_clifford(&u, &[], &x, &Limits::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exact_sum_norm() {
        let s = ExactSum {
            p: 3,
            counts: [2, 1, 0, 3, 0, 0, 1, 0],
        };
        assert!((s.norm_sqr() - s.to_complex().norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn random_t_doped_has_t_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        assert_eq!(random_t_doped(4, 5, &mut rng).t_count(), 5);
        assert_eq!(random_doped_circuit(4, 30, 4, &mut rng).t_count(), 4);
    }
}
