//! Fidelity estimation protocols with sample and classical-cost accounting.
//!
//! Every protocol draws its trials from independent random streams derived
//! from `(master_seed, trial_index)`, so reports do not depend on how trials
//! are scheduled.

mod pauli;
mod process;
mod scaling;
mod shadow;
pub mod stats;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use pauli::{
    generalized_dfe, pauli_dfe, pauli_dfe_mixed, pauli_dfe_truncated, product_stabilizers, state_resource_bounds,
    truncation_threshold,
};
pub use process::{
    entanglement_fidelity_exact, process_fidelity_estimate, process_resource_bounds, ProcessFidelity, PROCESS_LIMIT,
};
pub use scaling::{
    doped_magic_lower_bound, f_minus, f_plus, fourth_moment_closed_form, scaling_experiment, ScalingKind, ScalingRow,
};
pub use shadow::{default_shadow_batch_size, default_shadow_batches, shadow_fidelity};

/// Accuracy, confidence and protocol knobs shared by all estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimationConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub master_seed: u64,
    /// Copies of the prepared state per sampled observable.
    pub shots_per_pauli: u32,
    /// Replaces the number of sampled observables (or snapshots per batch).
    pub k_override: Option<usize>,
    /// Absolute cut on `|tr(P ψ)|` for the truncated estimator.
    pub truncation: Option<f64>,
    /// Snapshots per median-of-means batch.
    pub shadow_k: Option<usize>,
    /// Number of median-of-means batches.
    pub shadow_l: Option<usize>,
    /// Keep per-trial records in the report.
    pub record_trials: bool,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        EstimationConfig {
            epsilon: 0.1,
            delta: 0.05,
            master_seed: 0,
            shots_per_pauli: 1,
            k_override: None,
            truncation: None,
            shadow_k: None,
            shadow_l: None,
            record_trials: true,
        }
    }
}

impl EstimationConfig {
    pub fn new(epsilon: f64, delta: f64, master_seed: u64) -> Self {
        EstimationConfig {
            epsilon,
            delta,
            master_seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if !open_unit(self.epsilon) {
            return Err(Error::Config(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if !open_unit(self.delta) {
            return Err(Error::Config(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if self.shots_per_pauli == 0 {
            return Err(Error::Config("shots_per_pauli must be at least 1".into()));
        }
        for (name, v) in [
            ("k_override", self.k_override),
            ("shadow_k", self.shadow_k),
            ("shadow_l", self.shadow_l),
        ] {
            if v == Some(0) {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if let Some(theta) = self.truncation {
            if !theta.is_finite() || theta < 0.0 {
                return Err(Error::Config(format!(
                    "truncation threshold must be finite and >= 0, got {theta}"
                )));
            }
        }
        Ok(())
    }

    /// `ceil(c ln(2/δ) / (ε² m²))`.
    pub fn hoeffding_samples(&self, c: f64, m: f64) -> u64 {
        (c * (2.0 / self.delta).ln() / (self.epsilon * self.epsilon * m * m)).ceil() as u64
    }

    fn samples_or(&self, default: u64) -> u64 {
        self.k_override.map_or(default, |k| k as u64)
    }
}

/// Random stream for one trial.
pub fn trial_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// One sampled observable (or snapshot) and what was measured.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    /// Trial index, also the random stream it used.
    pub index: u64,
    /// Sampled Pauli, Pauli pair, observable or snapshot outcome.
    pub sample: String,
    /// State preparations consumed.
    pub shots: u64,
    /// Sum of `±1` outcomes, or the measured basis index for snapshots.
    pub outcome: i64,
    /// Single-trial estimator value.
    pub value: f64,
}

/// Sample-count bounds in terms of `M_2` and `M_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResourceBounds {
    /// Lower bound for the Hoeffding-based protocol (not information theoretic).
    pub protocol_lower: f64,
    pub upper: f64,
}

impl ResourceBounds {
    pub(crate) fn from_magic(epsilon: f64, delta: f64, m2: f64, m0: f64) -> Self {
        let log_term = (2.0 / delta).ln();
        ResourceBounds {
            protocol_lower: 2.0 / (epsilon * epsilon) * log_term * m2.exp2(),
            upper: 64.0 / epsilon.powi(4) * log_term * m0.exp2(),
        }
    }
}

/// Outcome of one estimation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimationReport {
    pub protocol: String,
    pub estimate: f64,
    /// Exact value from the dense oracle.
    pub truth: Option<f64>,
    /// State preparations (or channel uses) consumed.
    pub samples: u64,
    /// Classical cost per sample.
    pub classical_cost: u64,
    /// `samples * classical_cost`.
    pub total_cost: u64,
    /// Observables (or snapshots per batch).
    pub k: u64,
    /// Median-of-means batches; 1 for the Pauli protocols.
    pub batches: u64,
    /// Smallest `|coefficient|` on the sampled support.
    pub min_coefficient: Option<f64>,
    pub bounds: Option<ResourceBounds>,
    pub seed: u64,
    pub trials: Vec<TrialRecord>,
}

impl EstimationReport {
    fn new(protocol: &str, cfg: &EstimationConfig, k: u64, batches: u64, classical_cost: u64) -> Self {
        EstimationReport {
            protocol: protocol.to_string(),
            estimate: f64::NAN,
            truth: None,
            samples: 0,
            classical_cost,
            total_cost: 0,
            k,
            batches,
            min_coefficient: None,
            bounds: None,
            seed: cfg.master_seed,
            trials: Vec::new(),
        }
    }

    fn set_samples(&mut self, samples: u64) {
        self.samples = samples;
        self.total_cost = samples * self.classical_cost;
    }
}

/// Inverse-CDF sampler over a finite weighted support.
#[derive(Debug, Clone)]
pub(crate) struct WeightedSampler {
    cdf: Vec<f64>,
}

impl WeightedSampler {
    pub(crate) fn new(weights: impl Iterator<Item = f64>) -> Result<Self> {
        let mut acc = 0.0;
        let cdf: Vec<f64> = weights
            .map(|w| {
                acc += w.max(0.0);
                acc
            })
            .collect();
        if acc.is_nan() || acc <= 0.0 {
            return Err(Error::Config("sampling distribution has empty support".into()));
        }
        Ok(WeightedSampler { cdf })
    }

    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cdf.last().expect("non-empty");
        let u = rng.gen::<f64>() * total;
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }
}

/// Sum of `shots` one-shot `±1` outcomes with mean `e`.
pub(crate) fn one_shot_sum<R: Rng + ?Sized>(e: f64, shots: u32, rng: &mut R) -> i64 {
    let p = (1.0 + e.clamp(-1.0, 1.0)) / 2.0;
    (0..shots).map(|_| if rng.gen::<f64>() < p { 1 } else { -1 }).sum()
}
