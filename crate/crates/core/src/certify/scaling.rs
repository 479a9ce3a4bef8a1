use serde::{Deserialize, Serialize};

use super::{stats, trial_rng};
use crate::dense::{unitary_matrix, DenseState};
use crate::doped::random_t_doped;
use crate::error::{Error, Result};
use crate::magic::{magic_from_distribution, xi_state, xi_unitary, UNITARY_SWEEP_LIMIT};
use crate::par;
use crate::Limits;

/// `f_+ = (3d² - 3d - 4) / (4(d² - 1))`.
pub fn f_plus(d: f64) -> f64 {
    (3.0 * d * d - 3.0 * d - 4.0) / (4.0 * (d * d - 1.0))
}

/// `f_- = (3d² + 3d - 4) / (4(d² - 1))`.
pub fn f_minus(d: f64) -> f64 {
    (3.0 * d * d + 3.0 * d - 4.0) / (4.0 * (d * d - 1.0))
}

/// Lower bound on the t-doped average of `2^{M_2}`: `(d+3) / (4 + (d-1) f_+^t)`.
pub fn doped_magic_lower_bound(d: f64, t: usize) -> f64 {
    (d + 3.0) / (4.0 + (d - 1.0) * f_plus(d).powi(t as i32))
}

/// Closed form for the t-doped average of `tr(Q U^{⊗4} Q U†^{⊗4})` with
/// `Q = d^{-2} sum_P P^{⊗4}`.
pub fn fourth_moment_closed_form(d: f64, t: usize) -> f64 {
    let (fp, fm) = (f_plus(d), f_minus(d));
    let t = t as i32;
    let d2 = d * d;
    let head = 4.0 * (6.0 - d2 + d2 * d2) / (d2 * (d2 - 9.0));
    let tail = (d + 2.0) * (d + 4.0) * fp.powi(t) / (6.0 * d * (d + 3.0))
        + (d - 2.0) * (d - 4.0) * fm.powi(t) / (6.0 * d * (d - 3.0))
        + (d2 - 4.0) * ((fp + fm) / 2.0).powi(t) / (3.0 * d2);
    1.0 / (head + (d2 - 1.0) * tail)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingKind {
    /// `2^{M_2}` of t-doped states against the average lower bound.
    State,
    /// `2^{M_2}` of Choi states of t-doped circuits, plus the fourth-moment average.
    Process,
}

/// One row of a scaling sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRow {
    pub t: usize,
    /// Sample mean of `2^{M_2}`.
    pub mean_exp_m2: f64,
    pub stderr: f64,
    /// Lower bound on the mean: the state bound, or `d² / closed form` for processes.
    pub paper_bound: f64,
    /// `mean_exp_m2 / paper_bound`.
    pub ratio: f64,
    /// Process sweeps: mean of `tr(Q U^{⊗4} Q U†^{⊗4})`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_trace_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_trace_stderr: Option<f64>,
    /// Process sweeps: the printed closed form for that mean.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_trace_closed_form: Option<f64>,
}

/// Samples `samples` random t-doped circuits for every `t` and summarises
/// their magic. Sample `s` at `t` uses random stream `(t << 32) | s`.
pub fn scaling_experiment(
    kind: ScalingKind,
    n: usize,
    ts: &[usize],
    samples: usize,
    master_seed: u64,
    limits: &Limits,
) -> Result<Vec<ScalingRow>> {
    if n == 0 || samples == 0 {
        return Err(Error::Config("scaling sweeps need n >= 1 and samples >= 1".into()));
    }
    match kind {
        ScalingKind::State => crate::dense::check_pure_limit(n, limits)?,
        ScalingKind::Process => {
            if n > UNITARY_SWEEP_LIMIT {
                return Err(Error::Capacity {
                    what: "qubits for unitary Pauli sweep",
                    requested: n,
                    limit: UNITARY_SWEEP_LIMIT,
                });
            }
        }
    }
    let d = (1u64 << n) as f64;
    let mut rows = Vec::with_capacity(ts.len());
    for &t in ts {
        let per_sample = par::map(samples, |s| -> Result<(f64, f64)> {
            let mut rng = trial_rng(master_seed, ((t as u64) << 32) | s as u64);
            let circuit = random_t_doped(n, t, &mut rng);
            match kind {
                ScalingKind::State => {
                    let psi = DenseState::simulate(&circuit, &vec![false; n], limits)?;
                    let m2 = magic_from_distribution(&xi_state(&psi, limits)?, 2.0)?.value;
                    Ok((m2.exp2(), f64::NAN))
                }
                ScalingKind::Process => {
                    let u = unitary_matrix(&circuit, limits)?;
                    let xi = xi_unitary(&u)?;
                    // sum chi^4 = d^4 sum Xi^2
                    let q: f64 = xi.entries().iter().map(|e| e.chi.powi(4)).sum();
                    Ok((d * d / q, q))
                }
            }
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let exp_m2: Vec<f64> = per_sample.iter().map(|p| p.0).collect();
        let mean = stats::mean(&exp_m2);
        let row = match kind {
            ScalingKind::State => {
                let bound = doped_magic_lower_bound(d, t);
                ScalingRow {
                    t,
                    mean_exp_m2: mean,
                    stderr: stats::std_err(&exp_m2),
                    paper_bound: bound,
                    ratio: mean / bound,
                    q_trace_mean: None,
                    q_trace_stderr: None,
                    q_trace_closed_form: None,
                }
            }
            ScalingKind::Process => {
                let q: Vec<f64> = per_sample.iter().map(|p| p.1).collect();
                let closed = fourth_moment_closed_form(d, t);
                let bound = d * d / closed;
                ScalingRow {
                    t,
                    mean_exp_m2: mean,
                    stderr: stats::std_err(&exp_m2),
                    paper_bound: bound,
                    ratio: mean / bound,
                    q_trace_mean: Some(stats::mean(&q)),
                    q_trace_stderr: Some(stats::std_err(&q)),
                    q_trace_closed_form: Some(closed),
                }
            }
        };
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_plus_example() {
        assert!((f_plus(64.0) - 12092.0 / 16380.0).abs() < 1e-15);
        assert!((doped_magic_lower_bound(64.0, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stabilizer_row_is_exact() {
        let rows = scaling_experiment(ScalingKind::State, 3, &[0], 10, 1, &Limits::default()).unwrap();
        assert!((rows[0].mean_exp_m2 - 1.0).abs() < 1e-9);
        assert!(rows[0].stderr < 1e-9);
        let rows = scaling_experiment(ScalingKind::Process, 2, &[0], 5, 1, &Limits::default()).unwrap();
        assert!((rows[0].mean_exp_m2 - 1.0).abs() < 1e-9);
        assert!((rows[0].q_trace_mean.unwrap() - 16.0).abs() < 1e-9);
    }

    #[test]
    fn single_qubit_values_are_bounded() {
        let rows = scaling_experiment(ScalingKind::State, 1, &[1], 4, 2, &Limits::default()).unwrap();
        let m = rows[0].mean_exp_m2;
        assert!((1.0 - 1e-9..=4.0 / 3.0 + 1e-9).contains(&m));
    }
}
