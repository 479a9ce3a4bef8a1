use serde::Serialize;
use stabcert::certify::{
    generalized_dfe, pauli_dfe, pauli_dfe_truncated, process_fidelity_estimate, scaling_experiment, shadow_fidelity,
    EstimationReport, ScalingRow, TrialRecord,
};
use stabcert::dense::{pauli_matrix, unitary_matrix, DenseState, KrausChannel, NoiseModel};
use stabcert::doped::outcome_probability;
use stabcert::magic::{stabilizer_nullity, stabilizer_renyi_entropy};
use stabcert::{CircuitFile, DopedCircuit, Error, Limits, PauliString};

use crate::plan::{parse_bits, Command, DfeMode, RunPlan};

/// Everything a run produces, before it is written anywhere.
#[derive(Debug, Default)]
pub struct Artifacts {
    /// Pretty JSON for `report.json`.
    pub report: String,
    pub trials: Vec<TrialRecord>,
    /// `(file name, csv)` for tabular subcommands.
    pub table: Option<(&'static str, String)>,
    /// Text printed when no output directory is given.
    pub stdout: String,
}

#[derive(Serialize)]
struct SimulateReport {
    probability: f64,
    overlaps: u64,
    terms: u64,
    n_cl: u64,
}

#[derive(Serialize)]
struct MagicRow {
    alpha: f64,
    m_alpha: f64,
    support: usize,
    nullity: f64,
}

#[derive(Serialize)]
struct ScalingCsvRow {
    t: usize,
    mean_exp_m2: f64,
    stderr: f64,
    paper_bound: f64,
    ratio: f64,
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn to_csv<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("row serializes");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
}

/// Trial log rows as CSV.
pub fn trials_csv(trials: &[TrialRecord]) -> String {
    to_csv(trials)
}

fn circuit(file: &CircuitFile) -> Result<DopedCircuit, Error> {
    file.to_circuit()
}

fn state(c: &DopedCircuit, limits: &Limits) -> Result<DenseState, Error> {
    DenseState::simulate(c, &vec![false; c.num_qubits()], limits)
}

fn estimation(mut report: EstimationReport) -> Artifacts {
    let trials = std::mem::take(&mut report.trials);
    let report = pretty(&report);
    Artifacts {
        stdout: report.clone(),
        report,
        trials,
        table: None,
    }
}

fn table<T: Serialize, R: Serialize>(name: &'static str, report: &R, rows: &[T]) -> Artifacts {
    let csv = to_csv(rows);
    Artifacts {
        report: pretty(report),
        trials: Vec::new(),
        stdout: csv.clone(),
        table: Some((name, csv)),
    }
}

pub fn execute(plan: &RunPlan) -> Result<Artifacts, Error> {
    let s = &plan.settings;
    let limits = s.limits();
    let mut cfg = s.estimation();
    cfg.validate()?;
    match &plan.command {
        Command::Simulate { circuit: file, x } => {
            let u = circuit(file)?;
            let bits = parse_bits(x, u.num_qubits())?;
            let (p, ledger) = outcome_probability(&u, &bits, &limits)?;
            let report = SimulateReport {
                probability: p,
                overlaps: ledger.overlaps,
                terms: ledger.terms,
                n_cl: ledger.n_cl,
            };
            Ok(Artifacts {
                stdout: format!(
                    "probability {p}\noverlaps {}\nterms {}\nn_cl {}\n",
                    ledger.overlaps, ledger.terms, ledger.n_cl
                ),
                report: pretty(&report),
                ..Artifacts::default()
            })
        }
        Command::Magic { circuit: file, alphas } => {
            let psi = state(&circuit(file)?, &limits)?;
            let nullity = stabilizer_nullity(&psi, &limits)?;
            let rows = alphas
                .iter()
                .map(|&alpha| {
                    let m = stabilizer_renyi_entropy(&psi, alpha, &limits)?;
                    Ok(MagicRow {
                        alpha,
                        m_alpha: m.value,
                        support: m.support,
                        nullity,
                    })
                })
                .collect::<Result<Vec<_>, Error>>()?;
            Ok(table("magic.csv", &rows, &rows))
        }
        Command::Dfe {
            circuit: file,
            noise,
            mode,
            shots,
            observables,
        } => {
            cfg.shots_per_pauli = *shots;
            let psi = state(&circuit(file)?, &limits)?;
            let rho = noise.apply(&psi.to_density())?;
            let report = match observables {
                Some(list) => {
                    let ops = list
                        .iter()
                        .map(|o| {
                            let p: PauliString = o.parse()?;
                            if p.num_qubits() != psi.num_qubits() {
                                return Err(Error::Dimension {
                                    expected: psi.num_qubits(),
                                    found: p.num_qubits(),
                                });
                            }
                            Ok(pauli_matrix(&p))
                        })
                        .collect::<Result<Vec<_>, Error>>()?;
                    generalized_dfe(&psi, &rho, &ops, &cfg, &limits)?
                }
                None => match mode {
                    DfeMode::Plain => pauli_dfe(&psi, &rho, &cfg, &limits)?,
                    DfeMode::Truncated => pauli_dfe_truncated(&psi, &rho, &cfg, &limits)?,
                },
            };
            Ok(estimation(report))
        }
        Command::Sfe {
            circuit: file,
            noise,
            k,
            l,
        } => {
            cfg.shadow_k = *k;
            cfg.shadow_l = *l;
            let u = circuit(file)?;
            let rho = noise.apply(&state(&u, &limits)?.to_density())?;
            Ok(estimation(shadow_fidelity(&u, &rho, &cfg, &limits)?))
        }
        Command::Process { circuit: file, noise } => {
            let c = circuit(file)?;
            let u = unitary_matrix(&c, &limits)?;
            let mut ch = KrausChannel::unitary(u.clone())?;
            if *noise != NoiseModel::None {
                ch = ch.then(&noise.kraus(c.num_qubits())?)?;
            }
            Ok(estimation(process_fidelity_estimate(&u, &ch, &cfg)?))
        }
        Command::Scaling {
            kind,
            n,
            t_min,
            t_max,
            samples,
        } => {
            let ts: Vec<usize> = (*t_min..=*t_max).collect();
            let rows: Vec<ScalingRow> = scaling_experiment(*kind, *n, &ts, *samples, s.seed, &limits)?;
            let csv_rows: Vec<ScalingCsvRow> = rows
                .iter()
                .map(|r| ScalingCsvRow {
                    t: r.t,
                    mean_exp_m2: r.mean_exp_m2,
                    stderr: r.stderr,
                    paper_bound: r.paper_bound,
                    ratio: r.ratio,
                })
                .collect();
            Ok(table("scaling.csv", &rows, &csv_rows))
        }
    }
}
