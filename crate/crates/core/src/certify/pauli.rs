use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use super::{
    one_shot_sum, stats, trial_rng, EstimationConfig, EstimationReport, ResourceBounds, TrialRecord, WeightedSampler,
};
use crate::dense::{fidelity, CMatrix, DenseState, DensityMatrix};
use crate::error::{check_dim, Error, Result};
use crate::magic::{magic_from_distribution, xi_state, PauliDistribution, PauliSpectrum};
use crate::par;
use crate::pauli::{PauliIndex, PauliString};
use crate::Limits;

/// Tolerance for the stabilizing, commuting and orthogonality checks.
const CHECK_TOL: f64 = 1e-9;

fn bounds_from(xi: &PauliDistribution, cfg: &EstimationConfig) -> Result<ResourceBounds> {
    let m2 = magic_from_distribution(xi, 2.0)?.value;
    let m0 = magic_from_distribution(xi, 0.0)?.value;
    Ok(ResourceBounds::from_magic(cfg.epsilon, cfg.delta, m2, m0))
}

/// `(2/ε²) ln(2/δ) 2^{M_2}` and `(64/ε⁴) ln(2/δ) 2^{M_0}` for a pure or mixed target.
pub fn state_resource_bounds<S: PauliSpectrum>(
    state: &S,
    epsilon: f64,
    delta: f64,
    limits: &Limits,
) -> Result<ResourceBounds> {
    let cfg = EstimationConfig::new(epsilon, delta, 0);
    cfg.validate()?;
    bounds_from(&xi_state(state, limits)?, &cfg)
}

/// A sampled Pauli together with the coefficient its outcome is divided by.
struct Term {
    index: u64,
    coef: f64,
}

/// Importance-sampled `±1` measurements of Paulis on `ρ̃`.
fn run_pauli_trials(
    n: usize,
    terms: &[Term],
    weights: impl Iterator<Item = f64>,
    tilde: &[f64],
    k: u64,
    cfg: &EstimationConfig,
) -> Result<(Vec<f64>, Vec<TrialRecord>)> {
    let sampler = WeightedSampler::new(weights)?;
    let shots = cfg.shots_per_pauli;
    let rows = par::map(k as usize, |i| {
        let mut rng = trial_rng(cfg.master_seed, i as u64);
        let term = &terms[sampler.sample(&mut rng)];
        let outcome = one_shot_sum(tilde[term.index as usize], shots, &mut rng);
        let value = outcome as f64 / (shots as f64 * term.coef);
        (term.index, outcome, value)
    });
    let values = rows.iter().map(|r| r.2).collect();
    let trials = if cfg.record_trials {
        rows.iter()
            .enumerate()
            .map(|(i, &(index, outcome, value))| TrialRecord {
                index: i as u64,
                sample: PauliString::from_index(PauliIndex(index), n)
                    .expect("index in range")
                    .to_string(),
                shots: shots as u64,
                outcome,
                value,
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok((values, trials))
}

fn support_terms(xi: &PauliDistribution) -> Vec<Term> {
    xi.probs()
        .iter()
        .zip(xi.expectations())
        .enumerate()
        .filter(|(_, (p, _))| **p > 0.0)
        .map(|(i, (_, &e))| Term {
            index: i as u64,
            coef: e,
        })
        .collect()
}

fn min_abs(terms: &[Term]) -> f64 {
    terms.iter().map(|t| t.coef.abs()).fold(f64::INFINITY, f64::min)
}

fn importance_estimate(
    protocol: &str,
    xi: &PauliDistribution,
    rho_tilde: &DensityMatrix,
    cfg: &EstimationConfig,
    limits: &Limits,
) -> Result<EstimationReport> {
    cfg.validate()?;
    check_dim(xi.num_qubits(), rho_tilde.num_qubits())?;
    let terms = support_terms(xi);
    let m = min_abs(&terms);
    let k = cfg.samples_or(cfg.hoeffding_samples(2.0, m));
    let tilde = rho_tilde.pauli_expectations_all(limits)?;
    let weights = terms.iter().map(|t| xi.probs()[t.index as usize]);
    let (values, trials) = run_pauli_trials(xi.num_qubits(), &terms, weights, &tilde, k, cfg)?;
    let mut report = EstimationReport::new(protocol, cfg, k, 1, 1);
    report.estimate = stats::mean(&values);
    report.set_samples(k * cfg.shots_per_pauli as u64);
    report.min_coefficient = Some(m);
    report.bounds = Some(bounds_from(xi, cfg)?);
    report.trials = trials;
    Ok(report)
}

/// Pauli importance-sampling estimate of `F = <ψ|ρ̃|ψ>`.
pub fn pauli_dfe(
    psi: &DenseState,
    rho_tilde: &DensityMatrix,
    cfg: &EstimationConfig,
    limits: &Limits,
) -> Result<EstimationReport> {
    check_dim(psi.num_qubits(), rho_tilde.num_qubits())?;
    let xi = xi_state(psi, limits)?;
    let mut report = importance_estimate("pauli_dfe", &xi, rho_tilde, cfg, limits)?;
    report.truth = Some(fidelity(psi, rho_tilde)?);
    Ok(report)
}

/// Estimate of `Φ(ρ, ρ̃) = tr(ρ ρ̃) / Pur(ρ)` for a mixed target.
pub fn pauli_dfe_mixed(
    rho: &DensityMatrix,
    rho_tilde: &DensityMatrix,
    cfg: &EstimationConfig,
    limits: &Limits,
) -> Result<EstimationReport> {
    check_dim(rho.num_qubits(), rho_tilde.num_qubits())?;
    let purity = rho.purity();
    if purity.is_nan() || purity <= 0.0 {
        return Err(Error::Argument("target state has zero purity".into()));
    }
    let xi = xi_state(rho, limits)?;
    let mut report = importance_estimate("pauli_dfe_mixed", &xi, rho_tilde, cfg, limits)?;
    report.truth = Some(rho.overlap(rho_tilde)? / purity);
    Ok(report)
}

/// `(ε / 2√2) √(2^{-M_0(ψ)})`.
pub fn truncation_threshold(epsilon: f64, support: usize, n: usize) -> f64 {
    let m0 = (support as f64).log2() - n as f64;
    epsilon / (2.0 * std::f64::consts::SQRT_2) * (-m0).exp2().sqrt()
}

/// Estimator of the fidelity with the renormalised truncation of `ψ` that
/// keeps Pauli coefficients with `|tr(P ψ)| >= θ`. Its bias is at most `ε/2`.
pub fn pauli_dfe_truncated(
    psi: &DenseState,
    rho_tilde: &DensityMatrix,
    cfg: &EstimationConfig,
    limits: &Limits,
) -> Result<EstimationReport> {
    cfg.validate()?;
    let n = psi.num_qubits();
    check_dim(n, rho_tilde.num_qubits())?;
    let xi = xi_state(psi, limits)?;
    let theta = cfg
        .truncation
        .unwrap_or_else(|| truncation_threshold(cfg.epsilon, xi.support(), n));
    let kept: Vec<Term> = support_terms(&xi)
        .into_iter()
        .filter(|t| t.coef.abs() >= theta)
        .collect();
    if kept.is_empty() {
        return Err(Error::Config(format!(
            "truncation threshold {theta} removes every Pauli coefficient"
        )));
    }
    let d = (1u64 << n) as f64;
    let norm = (kept.iter().map(|t| t.coef * t.coef).sum::<f64>() / d).sqrt();
    let terms: Vec<Term> = kept
        .iter()
        .map(|t| Term {
            index: t.index,
            coef: t.coef / norm,
        })
        .collect();
    let m = min_abs(&terms);
    let k = cfg.samples_or(cfg.hoeffding_samples(8.0, m));
    let tilde = rho_tilde.pauli_expectations_all(limits)?;
    let weights = kept.iter().map(|t| t.coef * t.coef);
    let (values, trials) = run_pauli_trials(n, &terms, weights, &tilde, k, cfg)?;
    let mut report = EstimationReport::new("pauli_dfe_truncated", cfg, k, 1, 1);
    report.estimate = stats::mean(&values);
    report.truth = Some(fidelity(psi, rho_tilde)?);
    report.set_samples(k * cfg.shots_per_pauli as u64);
    report.min_coefficient = Some(m);
    report.bounds = Some(bounds_from(&xi, cfg)?);
    report.trials = trials;
    Ok(report)
}

fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().map(|a| a.norm()).fold(0.0, f64::max)
}

/// Eigenvalues of `o` with their probabilities on `rho`.
fn outcome_distribution(o: &CMatrix, rho: &CMatrix) -> Vec<(f64, f64)> {
    let eig = SymmetricEigen::new(o.clone());
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(j);
        let p = (v.adjoint() * rho * v)[(0, 0)].re.max(0.0);
        match out.iter_mut().find(|(l, _)| (l - lambda).abs() < 1e-9) {
            Some(entry) => entry.1 += p,
            None => out.push((lambda, p)),
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Fidelity from a complete set of commuting observables stabilizing `ψ`
/// (`O_i ψ = ±ψ`, `tr(O_i O_j) = d δ_ij`), sampled uniformly.
pub fn generalized_dfe(
    psi: &DenseState,
    rho_tilde: &DensityMatrix,
    observables: &[CMatrix],
    cfg: &EstimationConfig,
    limits: &Limits,
) -> Result<EstimationReport> {
    cfg.validate()?;
    let n = psi.num_qubits();
    check_dim(n, rho_tilde.num_qubits())?;
    crate::dense::check_mixed_limit(n, limits)?;
    let d = psi.dim();
    check_dim(d, observables.len())?;
    let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
    let mut signs = Vec::with_capacity(d);
    for (i, o) in observables.iter().enumerate() {
        if o.nrows() != d || o.ncols() != d {
            return Err(Error::Dimension {
                expected: d,
                found: o.nrows(),
            });
        }
        if max_abs_entry(&(o - o.adjoint())) > CHECK_TOL {
            return Err(Error::Validation(format!("observable {i} is not Hermitian")));
        }
        let ov = o * &v;
        let sign = if (&ov - &v).norm() <= CHECK_TOL {
            1.0
        } else if (&ov + &v).norm() <= CHECK_TOL {
            -1.0
        } else {
            return Err(Error::Validation(format!(
                "observable {i} does not stabilize the target"
            )));
        };
        signs.push(sign);
    }
    for i in 0..d {
        for j in i + 1..d {
            let (a, b) = (&observables[i], &observables[j]);
            if max_abs_entry(&(a * b - b * a)) > CHECK_TOL {
                return Err(Error::Validation(format!("observables {i} and {j} do not commute")));
            }
            if (a * b).trace().norm() > CHECK_TOL * d as f64 {
                return Err(Error::Validation(format!("observables {i} and {j} are not orthogonal")));
            }
        }
    }
    let dists: Vec<Vec<(f64, f64)>> = par::map(d, |i| outcome_distribution(&observables[i], rho_tilde.matrix()));
    let lambda_max = dists
        .iter()
        .flat_map(|dist| dist.iter().map(|(l, _)| l.abs()))
        .fold(0.0, f64::max);
    let k = cfg.samples_or(cfg.hoeffding_samples(2.0, 1.0 / lambda_max));
    let samplers: Vec<WeightedSampler> = dists
        .iter()
        .map(|dist| WeightedSampler::new(dist.iter().map(|x| x.1)))
        .collect::<Result<_>>()?;
    let rows = par::map(k as usize, |t| {
        let mut rng = trial_rng(cfg.master_seed, t as u64);
        let i = rand::Rng::gen_range(&mut rng, 0..d);
        let lambda = dists[i][samplers[i].sample(&mut rng)].0;
        (i, lambda, lambda * signs[i])
    });
    let values: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let mut report = EstimationReport::new("generalized_dfe", cfg, k, 1, 1);
    report.estimate = stats::mean(&values);
    report.truth = Some(fidelity(psi, rho_tilde)?);
    report.set_samples(k);
    report.min_coefficient = Some(1.0);
    if cfg.record_trials {
        report.trials = rows
            .iter()
            .enumerate()
            .map(|(t, &(i, lambda, value))| TrialRecord {
                index: t as u64,
                sample: format!("O{i}"),
                shots: 1,
                outcome: lambda.round() as i64,
                value,
            })
            .collect();
    }
    Ok(report)
}

/// `|φ_1> ⊗ ... ⊗ |φ_n>` (qubit 0 first) and its `2^n` stabilizing
/// observables `{1, 2|φ><φ| - 1}^{⊗n}`.
pub fn product_stabilizers(phis: &[[Complex64; 2]]) -> Result<(DenseState, Vec<CMatrix>)> {
    let n = phis.len();
    let mut locals = Vec::with_capacity(n);
    for phi in phis {
        let norm = (phi[0].norm_sqr() + phi[1].norm_sqr()).sqrt();
        if norm.is_nan() || norm <= 0.0 {
            return Err(Error::Argument("zero single-qubit state".into()));
        }
        let v = nalgebra::Vector2::new(phi[0] / norm, phi[1] / norm);
        let proj = v * v.adjoint();
        let refl = CMatrix::from_fn(2, 2, |i, j| {
            proj[(i, j)] * 2.0
                - if i == j {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
        });
        locals.push((v, refl));
    }
    let d = 1usize << n;
    let amps: Vec<Complex64> = (0..d)
        .map(|b| (0..n).map(|q| locals[q].0[(b >> q) & 1]).product())
        .collect();
    let state = DenseState::from_amplitudes(n, amps)?;
    let observables = (0..d)
        .map(|choice| {
            (0..n).fold(CMatrix::identity(1, 1), |acc, q| {
                let o = if (choice >> q) & 1 == 1 {
                    locals[q].1.clone()
                } else {
                    CMatrix::identity(2, 2)
                };
                o.kronecker(&acc)
            })
        })
        .collect();
    Ok((state, observables))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CliffordGate, Gate};
    use crate::dense::NoiseModel;

    fn t_state() -> DenseState {
        let mut s = DenseState::zero(1);
        s.apply_circuit(&[Gate::Clifford(CliffordGate::H(0)), Gate::T(0)]);
        s
    }

    fn cfg(seed: u64) -> EstimationConfig {
        EstimationConfig::new(0.1, 0.05, seed)
    }

    #[test]
    fn zero_state_is_deterministic() {
        let lim = Limits::default();
        let psi = DenseState::zero(3);
        let r = pauli_dfe(&psi, &psi.to_density(), &cfg(1), &lim).unwrap();
        assert_eq!(r.estimate, 1.0);
        assert_eq!(r.samples, r.k);
        assert_eq!(r.trials.len() as u64, r.k);
        assert!(r
            .trials
            .iter()
            .all(|t| !t.sample.contains('X') && !t.sample.contains('Y')));
    }

    #[test]
    fn stabilizer_bounds_example() {
        let b = state_resource_bounds(&DenseState::zero(2), 0.1, 0.05, &Limits::default()).unwrap();
        assert!((b.protocol_lower - 200.0 * 40f64.ln()).abs() < 1e-9);
        let bt = state_resource_bounds(&t_state(), 0.1, 0.05, &Limits::default()).unwrap();
        assert!((bt.protocol_lower / b.protocol_lower - 4.0 / 3.0).abs() < 1e-9);
        assert!((bt.upper / b.upper - 1.5).abs() < 1e-9);
    }

    #[test]
    fn mixed_target_examples() {
        let lim = Limits::default();
        let rho = DensityMatrix::maximally_mixed(1);
        let tilde = DenseState::zero(1).to_density();
        let r = pauli_dfe_mixed(&rho, &tilde, &cfg(2), &lim).unwrap();
        assert_eq!(r.estimate, 1.0);
        assert!((r.truth.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn truncation_threshold_example() {
        let th = truncation_threshold(0.1, 3, 1);
        assert!((th - 0.1 / (2.0 * 2f64.sqrt()) * (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(th < std::f64::consts::FRAC_1_SQRT_2);
        let lim = Limits::default();
        let t = t_state();
        let noisy = NoiseModel::GlobalDepolarizing { p: 0.2 }
            .apply(&t.to_density())
            .unwrap();
        let a = pauli_dfe(&t, &noisy, &cfg(3), &lim).unwrap();
        let c = EstimationConfig {
            k_override: Some(a.k as usize),
            ..cfg(3)
        };
        let b = pauli_dfe_truncated(&t, &noisy, &c, &lim).unwrap();
        assert_eq!(a.estimate, b.estimate);
    }

    #[test]
    fn truncation_can_empty_the_support() {
        let c = EstimationConfig {
            truncation: Some(2.0),
            ..cfg(0)
        };
        let psi = DenseState::zero(1);
        let r = pauli_dfe_truncated(&psi, &psi.to_density(), &c, &Limits::default());
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn product_observables_are_valid() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let phis = [
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(h, 0.0), Complex64::new(0.5, 0.5)],
            [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)],
        ];
        let (psi, obs) = product_stabilizers(&phis).unwrap();
        let r = generalized_dfe(&psi, &psi.to_density(), &obs, &cfg(4), &Limits::default()).unwrap();
        assert!((r.estimate - 1.0).abs() < 1e-12);
        assert_eq!(r.k, (2.0 * 40f64.ln() / 0.01).ceil() as u64);
    }

    #[test]
    fn non_commuting_set_names_the_pair() {
        let psi = DenseState::zero(1);
        let x = crate::dense::pauli_matrix(&"X".parse().unwrap());
        let obs = vec![CMatrix::identity(2, 2), x];
        let err = generalized_dfe(&psi, &psi.to_density(), &obs, &cfg(0), &Limits::default()).unwrap_err();
        assert!(
            matches!(err, Error::Validation(ref m) if m.contains("observable 1")),
            "{err}"
        );
        let zz = DenseState::zero(2);
        let (_, mut obs) = product_stabilizers(&[[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]; 2]).unwrap();
        let mut swap_like = CMatrix::zeros(4, 4);
        swap_like[(0, 0)] = Complex64::new(1.0, 0.0);
        swap_like[(1, 3)] = Complex64::new(1.0, 0.0);
        swap_like[(3, 1)] = Complex64::new(1.0, 0.0);
        swap_like[(2, 2)] = Complex64::new(-1.0, 0.0);
        obs[1] = swap_like;
        let err = generalized_dfe(&zz, &zz.to_density(), &obs, &cfg(0), &Limits::default()).unwrap_err();
        assert!(
            matches!(err, Error::Validation(ref m) if m.contains("do not commute")),
            "{err}"
        );
    }

    #[test]
    fn reports_ignore_worker_count() {
        let lim = Limits::default();
        let t = t_state().tensor(&t_state());
        let noisy = NoiseModel::LocalDepolarizing { p: 0.1 }.apply(&t.to_density()).unwrap();
        let a = par::with_workers(Some(1), || pauli_dfe(&t, &noisy, &cfg(5), &lim).unwrap());
        let b = par::with_workers(Some(4), || pauli_dfe(&t, &noisy, &cfg(5), &lim).unwrap());
        assert_eq!(a, b);
    }
}
