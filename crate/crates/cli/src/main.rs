mod exec;
mod plan;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use stabcert::certify::ScalingKind;
use stabcert::{par, CircuitFile, Error};

use exec::{execute, trials_csv, Artifacts};
use plan::{parse_range, Command, DfeMode, RunPlan, Settings};

#[derive(Parser)]
#[command(
    name = "stabcert",
    version,
    about = "Clifford+T simulation, magic and fidelity estimation"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args)]
struct Global {
    /// Target accuracy.
    #[arg(long, global = true, default_value_t = 0.1)]
    epsilon: f64,
    /// Failure probability.
    #[arg(long, global = true, default_value_t = 0.05)]
    delta: f64,
    /// Master seed for all random streams.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "STABCERT_WORKERS")]
    workers: Option<usize>,
    /// Largest T-count for gadget simulation.
    #[arg(long, global = true, default_value_t = 16)]
    t_limit: usize,
    /// Largest qubit count for dense statevectors.
    #[arg(long, global = true, default_value_t = 12)]
    dense_limit: usize,
    /// Directory for report, trial log and manifest.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Sub {
    /// Probability of one output string.
    Simulate { circuit: PathBuf, x: String },
    /// Stabilizer Rényi entropies of the output state.
    Magic {
        circuit: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        alpha: Vec<f64>,
    },
    /// Direct fidelity estimation from Pauli measurements.
    Dfe {
        circuit: PathBuf,
        #[arg(long, default_value = "none")]
        noise: String,
        /// Drop small Pauli coefficients first.
        #[arg(long)]
        truncated: bool,
        #[arg(long, default_value_t = 1)]
        shots: u32,
        /// JSON list of stabilizing Pauli observables, e.g. ["ZI","IZ"].
        #[arg(long, conflicts_with = "truncated")]
        observables: Option<PathBuf>,
    },
    /// Shadow fidelity estimation with random Clifford snapshots.
    Sfe {
        circuit: PathBuf,
        #[arg(long, default_value = "none")]
        noise: String,
        /// Snapshots per batch.
        #[arg(long)]
        k: Option<usize>,
        /// Median-of-means batches.
        #[arg(long)]
        l: Option<usize>,
    },
    /// Entanglement fidelity of a noisy implementation of the circuit.
    Process {
        circuit: PathBuf,
        #[arg(long, default_value = "none")]
        noise: String,
    },
    /// Average magic of random t-doped circuits.
    Scaling {
        #[arg(long, value_enum, default_value_t = Kind::State)]
        kind: Kind,
        #[arg(long)]
        n: usize,
        /// Inclusive range, e.g. 0..8.
        #[arg(long, default_value = "0..8")]
        t: String,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Rerun the invocation recorded in a manifest.
    Replay { manifest: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    State,
    Process,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::Capacity { .. }) => 3,
            CliError::Core(Error::Validation(_)) => 4,
            CliError::Write { .. } => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    version: String,
    created_unix: u64,
    workers: Option<usize>,
    limits: stabcert::Limits,
    config: stabcert::certify::EstimationConfig,
    run: RunPlan,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: PathBuf, text: &str) -> Result<(), CliError> {
    fs::write(&path, text).map_err(|source| CliError::Write { path, source })
}

fn load_circuit(path: &Path) -> Result<CircuitFile, CliError> {
    Ok(CircuitFile::parse(&read(path)?)?)
}

fn resolve(global: &Global, sub: Sub) -> Result<RunPlan, CliError> {
    let settings = Settings {
        epsilon: global.epsilon,
        delta: global.delta,
        seed: global.seed,
        t_limit: global.t_limit,
        dense_limit: global.dense_limit,
    };
    let command = match sub {
        Sub::Simulate { circuit, x } => Command::Simulate {
            circuit: load_circuit(&circuit)?,
            x,
        },
        Sub::Magic { circuit, alpha } => Command::Magic {
            circuit: load_circuit(&circuit)?,
            alphas: alpha,
        },
        Sub::Dfe {
            circuit,
            noise,
            truncated,
            shots,
            observables,
        } => Command::Dfe {
            circuit: load_circuit(&circuit)?,
            noise: noise.parse()?,
            mode: if truncated { DfeMode::Truncated } else { DfeMode::Plain },
            shots,
            observables: match observables {
                Some(path) => Some(
                    serde_json::from_str(&read(&path)?)
                        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?,
                ),
                None => None,
            },
        },
        Sub::Sfe { circuit, noise, k, l } => Command::Sfe {
            circuit: load_circuit(&circuit)?,
            noise: noise.parse()?,
            k,
            l,
        },
        Sub::Process { circuit, noise } => Command::Process {
            circuit: load_circuit(&circuit)?,
            noise: noise.parse()?,
        },
        Sub::Scaling { kind, n, t, samples } => {
            let (t_min, t_max) = parse_range(&t)?;
            Command::Scaling {
                kind: match kind {
                    Kind::State => ScalingKind::State,
                    Kind::Process => ScalingKind::Process,
                },
                n,
                t_min,
                t_max,
                samples,
            }
        }
        Sub::Replay { manifest } => {
            let m: Manifest = serde_json::from_str(&read(&manifest)?)
                .map_err(|e| Error::Parse(format!("{}: {e}", manifest.display())))?;
            return Ok(m.run);
        }
    };
    Ok(RunPlan { settings, command })
}

fn emit(out: &Path, plan: &RunPlan, workers: Option<usize>, art: &Artifacts) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|source| CliError::Write {
        path: out.to_path_buf(),
        source,
    })?;
    write(out.join("report.json"), &art.report)?;
    if let Some((name, csv)) = &art.table {
        write(out.join(name), csv)?;
    }
    if !art.trials.is_empty() {
        let jsonl: String = art
            .trials
            .iter()
            .map(|t| serde_json::to_string(t).expect("trial serializes") + "\n")
            .collect();
        write(out.join("trials.jsonl"), &jsonl)?;
        write(out.join("trials.csv"), &trials_csv(&art.trials))?;
    }
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        workers,
        limits: plan.settings.limits(),
        config: plan.settings.estimation(),
        run: plan.clone(),
    };
    write(
        out.join("manifest.json"),
        &(serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n"),
    )
}

fn run(cli: Cli) -> Result<(), CliError> {
    let plan = resolve(&cli.global, cli.command)?;
    let workers = cli.global.workers;
    let art = par::with_workers(workers, || execute(&plan))?;
    match &cli.global.out {
        Some(out) => {
            emit(out, &plan, workers, &art)?;
            eprintln!("{}: wrote {}", plan.command.name(), out.display());
        }
        None => print!("{}", art.stdout),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
