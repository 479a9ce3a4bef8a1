use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use super::{stats, trial_rng, EstimationConfig, EstimationReport, ResourceBounds, TrialRecord, WeightedSampler};
use crate::dense::{pauli_coefficients, pauli_matrix, CMatrix, KrausChannel};
use crate::error::{check_dim, Error, Result};
use crate::magic::{xi_unitary, UnitaryPauliDistribution};
use crate::par;
use crate::pauli::{PauliIndex, PauliString};

/// Largest register for the `16^n` Pauli-transfer sweeps.
pub const PROCESS_LIMIT: usize = 4;

fn process_qubits(u: &CMatrix, ch: &KrausChannel) -> Result<usize> {
    let d = u.nrows();
    if !d.is_power_of_two() || u.ncols() != d {
        return Err(Error::Argument(format!(
            "expected a 2^n square unitary, got {}x{}",
            d,
            u.ncols()
        )));
    }
    check_dim(d, ch.dim())?;
    let n = d.trailing_zeros() as usize;
    if n > PROCESS_LIMIT {
        return Err(Error::Capacity {
            what: "qubits for process fidelity",
            requested: n,
            limit: PROCESS_LIMIT,
        });
    }
    Ok(n)
}

fn pauli(i: u64, n: usize) -> PauliString {
    PauliString::from_index(PauliIndex(i), n).expect("index in range")
}

/// Column `ν` of the Pauli transfer matrix: `tr(P_μ E(P_ν))` for every `μ`.
fn transfer_column(ch: &KrausChannel, nu: u64, n: usize) -> Vec<f64> {
    let image = ch.apply_matrix(&pauli_matrix(&pauli(nu, n)));
    pauli_coefficients(&image)
        .expect("square matrix")
        .into_iter()
        .map(|c| c.re)
        .collect()
}

/// Exact entanglement and average gate fidelity of a channel against `U`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProcessFidelity {
    /// `d^{-4} sum tr(P_μ U P_ν U†) tr(P_μ E(P_ν))`.
    pub entanglement: f64,
    /// `(sum_a |tr(U† A_a)|² / d + 1) / (d + 1)` from the Kraus operators.
    pub average: f64,
}

pub fn entanglement_fidelity_exact(u: &CMatrix, ch: &KrausChannel) -> Result<ProcessFidelity> {
    let n = process_qubits(u, ch)?;
    let d = 1usize << n;
    let df = d as f64;
    let columns = par::map(d * d, |nu| {
        let target =
            pauli_coefficients(&(u * pauli_matrix(&pauli(nu as u64, n)) * u.adjoint())).expect("square matrix");
        let actual = transfer_column(ch, nu as u64, n);
        target.iter().zip(&actual).map(|(a, b)| a.re * b).sum::<f64>()
    });
    let entanglement = columns.iter().sum::<f64>() / df.powi(4);
    let ud = u.adjoint();
    let kraus: f64 = ch.operators().iter().map(|a| (&ud * a).trace().norm_sqr()).sum();
    Ok(ProcessFidelity {
        entanglement,
        average: (kraus / df + 1.0) / (df + 1.0),
    })
}

fn bounds_for(xi: &UnitaryPauliDistribution, cfg: &EstimationConfig) -> Result<ResourceBounds> {
    let two_n = 2.0 * xi.num_qubits() as f64;
    let m2 = xi.entropy(2.0)? - two_n;
    let m0 = xi.entropy(0.0)? - two_n;
    Ok(ResourceBounds::from_magic(cfg.epsilon, cfg.delta, m2, m0))
}

/// `(2/ε²) ln(2/δ) 2^{M_2(|U>)}` and `(64/ε⁴) ln(2/δ) 2^{M_0(|U>)}`.
pub fn process_resource_bounds(u: &CMatrix, epsilon: f64, delta: f64) -> Result<ResourceBounds> {
    let cfg = EstimationConfig::new(epsilon, delta, 0);
    cfg.validate()?;
    bounds_for(&xi_unitary(u)?, &cfg)
}

/// Monte Carlo estimate of the entanglement fidelity between `U` and a channel.
///
/// Pairs `(P_μ, P_ν)` are drawn from `Ξ_U`. Each trial prepares
/// `(1 + s P_ν)/d` with a uniform sign `s` (the maximally mixed state when
/// `P_ν = 1`), sends it through the channel, measures `P_μ` once and scores
/// `s·o·d / tr(P_μ U P_ν U†)`.
pub fn process_fidelity_estimate(u: &CMatrix, ch: &KrausChannel, cfg: &EstimationConfig) -> Result<EstimationReport> {
    cfg.validate()?;
    let n = process_qubits(u, ch)?;
    let df = (1u64 << n) as f64;
    let xi = xi_unitary(u)?;
    let entries = xi.entries();
    let m = entries.iter().map(|e| e.chi.abs()).fold(f64::INFINITY, f64::min);
    let k = cfg.samples_or(cfg.hoeffding_samples(2.0, m));
    let mut nus: Vec<u64> = entries.iter().map(|e| e.q.0).collect();
    nus.push(0);
    nus.sort_unstable();
    nus.dedup();
    let cols = par::map(nus.len(), |i| transfer_column(ch, nus[i], n));
    let ptm: BTreeMap<u64, Vec<f64>> = nus.into_iter().zip(cols).collect();
    let identity_col = &ptm[&0];
    let sampler = WeightedSampler::new(entries.iter().map(|e| e.prob))?;
    let rows = par::map(k as usize, |i| {
        let mut rng = trial_rng(cfg.master_seed, i as u64);
        let e = &entries[sampler.sample(&mut rng)];
        let (mu, nu) = (e.p.0 as usize, e.q.0);
        let s: f64 = if nu == 0 || rng.gen::<bool>() { 1.0 } else { -1.0 };
        let mean = if nu == 0 {
            identity_col[mu] / df
        } else {
            (identity_col[mu] + s * ptm[&nu][mu]) / df
        };
        let o = if rng.gen::<f64>() < (1.0 + mean.clamp(-1.0, 1.0)) / 2.0 {
            1.0
        } else {
            -1.0
        };
        (e.p.0, nu, (s * o) as i64, s * o / e.chi)
    });
    let values: Vec<f64> = rows.iter().map(|r| r.3).collect();
    let mut report = EstimationReport::new("process_fidelity", cfg, k, 1, 1);
    report.estimate = stats::mean(&values);
    report.truth = Some(entanglement_fidelity_exact(u, ch)?.entanglement);
    report.set_samples(k);
    report.min_coefficient = Some(m);
    report.bounds = Some(bounds_for(&xi, cfg)?);
    if cfg.record_trials {
        report.trials = rows
            .iter()
            .enumerate()
            .map(|(i, &(mu, nu, outcome, value))| TrialRecord {
                index: i as u64,
                sample: format!("{},{}", pauli(mu, n), pauli(nu, n)),
                shots: 1,
                outcome,
                value,
            })
            .collect();
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{DopedCircuit, Gate};
    use crate::dense::{unitary_matrix, NoiseModel};
    use crate::stab::random_clifford;
    use crate::Limits;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t_matrix() -> CMatrix {
        unitary_matrix(&DopedCircuit::new(1, vec![Gate::T(0)]).unwrap(), &Limits::default()).unwrap()
    }

    #[test]
    fn noiseless_and_depolarized() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=3 {
            let c = DopedCircuit::from_clifford(n, &random_clifford(n, &mut rng)).unwrap();
            let u = unitary_matrix(
                &c.then(&DopedCircuit::new(n, vec![Gate::T(0)]).unwrap()).unwrap(),
                &Limits::default(),
            )
            .unwrap();
            let ideal = KrausChannel::unitary(u.clone()).unwrap();
            let f = entanglement_fidelity_exact(&u, &ideal).unwrap();
            assert!((f.entanglement - 1.0).abs() < 1e-9);
            assert!((f.average - 1.0).abs() < 1e-9);
            let p = 0.3;
            let noisy = ideal
                .then(&NoiseModel::GlobalDepolarizing { p }.kraus(n).unwrap())
                .unwrap();
            let f = entanglement_fidelity_exact(&u, &noisy).unwrap();
            let d2 = (1u64 << (2 * n)) as f64;
            assert!((f.entanglement - ((1.0 - p) + p / d2)).abs() < 1e-9);
            let d = (1u64 << n) as f64;
            assert!((f.average - (d * f.entanglement + 1.0) / (d + 1.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn t_against_identity() {
        let f = entanglement_fidelity_exact(&t_matrix(), &KrausChannel::identity(1)).unwrap();
        assert!((f.entanglement - (2.0 + 2f64.sqrt()) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn clifford_targets_are_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = DopedCircuit::from_clifford(2, &random_clifford(2, &mut rng)).unwrap();
        let u = unitary_matrix(&c, &Limits::default()).unwrap();
        let cfg = EstimationConfig::new(0.1, 0.05, 1);
        let r = process_fidelity_estimate(&u, &KrausChannel::unitary(u.clone()).unwrap(), &cfg).unwrap();
        assert!(r.trials.iter().all(|t| (t.value - 1.0).abs() < 1e-12));
        assert!((r.estimate - 1.0).abs() < 1e-12);
        let b = r.bounds.unwrap();
        assert!((b.protocol_lower - 200.0 * 40f64.ln()).abs() < 1e-6);
        assert_eq!(r.k, cfg.hoeffding_samples(2.0, 1.0));
    }

    #[test]
    fn process_limit() {
        let u = CMatrix::identity(32, 32);
        let ch = KrausChannel::new(vec![u.clone()]).unwrap();
        assert!(matches!(
            entanglement_fidelity_exact(&u, &ch),
            Err(Error::Capacity { .. })
        ));
    }
}
