use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::circuits::{build_deutsch_jozsa, build_grover, Circuit};
use crate::error::{Error, Result};
use crate::ga::GAConfig;
use crate::noise::NoiseParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    DeutschJozsa,
    Grover,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deutsch-jozsa" | "dj" => Ok(Self::DeutschJozsa),
            "grover" => Ok(Self::Grover),
            other => Err(Error::arg(format!(
                "unknown algorithm {other:?} (expected deutsch-jozsa or grover)"
            ))),
        }
    }
}

impl Algorithm {
    /// The benchmark on `n_qubits` qubits in total (Deutsch-Jozsa uses one
    /// of them as the ancilla).
    pub fn circuit(self, n_qubits: usize) -> Result<Circuit> {
        match self {
            Self::DeutschJozsa => {
                if n_qubits < 2 {
                    return Err(Error::arg("Deutsch-Jozsa needs at least 2 qubits"));
                }
                build_deutsch_jozsa(n_qubits - 1)
            }
            Self::Grover => build_grover(n_qubits),
        }
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// One experiment. Serialized flat: noise and GA fields sit at the top level
/// next to the experiment fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    /// Total register size.
    pub n_qubits: usize,
    #[serde(flatten)]
    pub noise: NoiseParams,
    #[serde(flatten)]
    pub ga: GAConfig,
    pub workers: usize,
    pub output_dir: PathBuf,
    /// Also export the baseline schedule and waveform.
    pub run_baseline: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::DeutschJozsa,
            n_qubits: 4,
            noise: NoiseParams::default(),
            ga: GAConfig::default(),
            workers: default_workers(),
            output_dir: PathBuf::from("results"),
            run_baseline: true,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json(j) => Error::Parse {
                path: path.to_path_buf(),
                line: j.line() as u64,
                msg: j.to_string(),
            },
            other => other,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::arg("workers must be at least 1"));
        }
        self.algorithm.circuit(self.n_qubits)?;
        self.noise.validate()?;
        self.ga.validate()
    }
}
