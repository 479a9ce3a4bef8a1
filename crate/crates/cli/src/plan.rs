use serde::{Deserialize, Serialize};
use stabcert::certify::{EstimationConfig, ScalingKind};
use stabcert::dense::NoiseModel;
use stabcert::{CircuitFile, Error, Limits};

/// Settings shared by every subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub t_limit: usize,
    pub dense_limit: usize,
}

impl Settings {
    pub fn limits(&self) -> Limits {
        let defaults = Limits::default();
        Limits {
            dense_pure: self.dense_limit,
            dense_mixed: defaults.dense_mixed.min(self.dense_limit),
            t_max: self.t_limit,
        }
    }

    pub fn estimation(&self) -> EstimationConfig {
        EstimationConfig::new(self.epsilon, self.delta, self.seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DfeMode {
    Plain,
    Truncated,
}

/// A fully resolved invocation. Circuits are embedded so that a manifest
/// reproduces the run without the original files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
pub enum Command {
    Simulate {
        circuit: CircuitFile,
        x: String,
    },
    Magic {
        circuit: CircuitFile,
        alphas: Vec<f64>,
    },
    Dfe {
        circuit: CircuitFile,
        noise: NoiseModel,
        mode: DfeMode,
        shots: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        observables: Option<Vec<String>>,
    },
    Sfe {
        circuit: CircuitFile,
        noise: NoiseModel,
        k: Option<usize>,
        l: Option<usize>,
    },
    Process {
        circuit: CircuitFile,
        noise: NoiseModel,
    },
    Scaling {
        kind: ScalingKind,
        n: usize,
        t_min: usize,
        t_max: usize,
        samples: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate { .. } => "simulate",
            Command::Magic { .. } => "magic",
            Command::Dfe { .. } => "dfe",
            Command::Sfe { .. } => "sfe",
            Command::Process { .. } => "process",
            Command::Scaling { .. } => "scaling",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunPlan {
    pub settings: Settings,
    pub command: Command,
}

/// Parses a bit string with qubit 0 leftmost.
pub fn parse_bits(s: &str, n: usize) -> Result<Vec<bool>, Error> {
    let bits = s
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::Parse(format!("invalid bit {other:?} in {s:?}"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    if bits.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: bits.len(),
        });
    }
    Ok(bits)
}

/// Parses `A..B` (inclusive) or a single value.
pub fn parse_range(s: &str) -> Result<(usize, usize), Error> {
    let bad = || Error::Parse(format!("invalid range {s:?}, expected A..B"));
    match s.split_once("..") {
        Some((a, b)) => {
            let a = a.trim().parse().map_err(|_| bad())?;
            let b = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            Ok((a, b))
        }
        None => {
            let v = s.trim().parse().map_err(|_| bad())?;
            Ok((v, v))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bits_and_ranges() {
        assert_eq!(parse_bits("10", 2).unwrap(), vec![true, false]);
        assert!(matches!(parse_bits("1", 2), Err(Error::Dimension { .. })));
        assert!(parse_bits("12", 2).is_err());
        assert_eq!(parse_range("0..8").unwrap(), (0, 8));
        assert_eq!(parse_range("0..=8").unwrap(), (0, 8));
        assert_eq!(parse_range("3").unwrap(), (3, 3));
        assert!(parse_range("5..2").is_err());
    }

    #[test]
    fn plan_round_trips_through_json() {
        let plan = RunPlan {
            settings: Settings {
                epsilon: 0.1,
                delta: 0.05,
                seed: 7,
                t_limit: 16,
                dense_limit: 12,
            },
            command: Command::Sfe {
                circuit: CircuitFile::parse(r#"{"n": 1, "gates": [{"g": "H", "q": [0]}]}"#).unwrap(),
                noise: NoiseModel::LocalDepolarizing { p: 0.1 },
                k: Some(3),
                l: None,
            },
        };
        let text = serde_json::to_string(&plan).unwrap();
        assert_eq!(serde_json::from_str::<RunPlan>(&text).unwrap(), plan);
    }
}
