use super::{stats, trial_rng, EstimationConfig, EstimationReport, TrialRecord};
use crate::circuit::DopedCircuit;
use crate::dense::{fidelity, DenseState, DensityMatrix};
use crate::doped::{check_t, outcome_probability_with_clifford};
use crate::error::{check_dim, Result};
use crate::par;
use crate::stab::random_clifford;
use crate::Limits;

/// `ceil(8 ln(2/δ))` median-of-means batches.
pub fn default_shadow_batches(delta: f64) -> u64 {
    (8.0 * (2.0 / delta).ln()).ceil() as u64
}

/// `ceil(20/ε²)` snapshots per batch.
pub fn default_shadow_batch_size(epsilon: f64) -> u64 {
    (20.0 / (epsilon * epsilon)).ceil() as u64
}

/// Random-Clifford snapshot estimate of `<ψ|ρ̃|ψ>` with `ψ = U|0^n>`.
///
/// Each snapshot measures `C ρ̃ C†` in the computational basis and scores
/// `(d+1)|<x|C|ψ>|² - 1`, with the probability computed exactly by the
/// gadget sum. Batch means are combined by their median.
pub fn shadow_fidelity(
    psi_circuit: &DopedCircuit,
    rho_tilde: &DensityMatrix,
    cfg: &EstimationConfig,
    limits: &Limits,
) -> Result<EstimationReport> {
    cfg.validate()?;
    let n = psi_circuit.num_qubits();
    check_dim(n, rho_tilde.num_qubits())?;
    check_t(psi_circuit.t_count(), limits)?;
    let k = cfg
        .shadow_k
        .or(cfg.k_override)
        .map_or_else(|| default_shadow_batch_size(cfg.epsilon), |k| k as u64);
    let l = cfg
        .shadow_l
        .map_or_else(|| default_shadow_batches(cfg.delta), |l| l as u64);
    let d = (1u64 << n) as f64;
    let rows = par::map((k * l) as usize, |i| -> Result<_> {
        let mut rng = trial_rng(cfg.master_seed, i as u64);
        let c = random_clifford(n, &mut rng);
        let mut rho = rho_tilde.clone();
        rho.apply_clifford(&c);
        let x = rho.measure_computational(&mut rng);
        let (p, ledger) = outcome_probability_with_clifford(psi_circuit, &c, &x, limits)?;
        let index = x.iter().enumerate().fold(0i64, |acc, (q, &b)| acc | ((b as i64) << q));
        Ok((index, (d + 1.0) * p - 1.0, ledger.n_cl))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let n_cl = rows.first().map_or(0, |r| r.2);
    let mut report = EstimationReport::new("shadow_fidelity", cfg, k, l, n_cl);
    report.estimate = stats::median_of_means(&values, k as usize);
    report.set_samples(k * l);
    if n <= limits.dense_mixed {
        let psi = DenseState::simulate(psi_circuit, &vec![false; n], limits)?;
        report.truth = Some(fidelity(&psi, rho_tilde)?);
    }
    if cfg.record_trials {
        report.trials = rows
            .iter()
            .enumerate()
            .map(|(i, &(index, value, _))| TrialRecord {
                index: i as u64,
                sample: (0..n).map(|q| if (index >> q) & 1 == 1 { '1' } else { '0' }).collect(),
                shots: 1,
                outcome: index,
                value,
            })
            .collect();
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CliffordGate, Gate};
    use crate::dense::NoiseModel;

    #[test]
    fn snapshot_values_stay_in_range() {
        let lim = Limits::default();
        let u = DopedCircuit::new(
            2,
            vec![
                Gate::Clifford(CliffordGate::H(0)),
                Gate::T(0),
                Gate::Clifford(CliffordGate::CX(0, 1)),
            ],
        )
        .unwrap();
        let noisy = NoiseModel::GlobalDepolarizing { p: 0.3 }
            .apply(&DenseState::zero(2).to_density())
            .unwrap();
        let cfg = EstimationConfig {
            shadow_k: Some(50),
            shadow_l: Some(3),
            ..EstimationConfig::new(0.2, 0.1, 7)
        };
        let r = shadow_fidelity(&u, &noisy, &cfg, &lim).unwrap();
        assert_eq!(r.samples, 150);
        assert_eq!(r.trials.len(), 150);
        assert!(r
            .trials
            .iter()
            .all(|t| t.value >= -1.0 - 1e-12 && t.value <= 4.0 + 1e-12));
        assert_eq!(r.classical_cost, 2 * 27);
        assert_eq!(r.total_cost, 150 * 54);
    }

    #[test]
    fn defaults_follow_config() {
        assert_eq!(default_shadow_batches(0.05), (8.0 * 40f64.ln()).ceil() as u64);
        assert_eq!(default_shadow_batch_size(0.1), 2000);
    }

    #[test]
    fn t_limit_is_enforced() {
        let lim = Limits {
            t_max: 1,
            ..Limits::default()
        };
        let u = DopedCircuit::new(1, vec![Gate::T(0), Gate::T(0)]).unwrap();
        let r = shadow_fidelity(
            &u,
            &DenseState::zero(1).to_density(),
            &EstimationConfig::default(),
            &lim,
        );
        assert!(matches!(r, Err(crate::Error::Capacity { .. })));
    }
}
