use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

use crate::error::{Error, Result};
use crate::ga::DiversityAction;

use super::config::{Algorithm, ExperimentConfig};
use super::experiment::run_experiment;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ARGUMENT: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

/// Evolve pulse parameters of a benchmark circuit under noise.
///
/// Settings come from the defaults, then `--config`, then individual flags.
#[derive(Debug, Parser)]
#[command(name = "pulsefit", version)]
pub struct Cli {
    /// JSON experiment file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// deutsch-jozsa or grover
    #[arg(long)]
    pub algorithm: Option<String>,
    /// Total number of qubits
    #[arg(long)]
    pub qubits: Option<usize>,
    #[arg(long)]
    pub population: Option<usize>,
    #[arg(long)]
    pub generations: Option<usize>,
    #[arg(long)]
    pub t1: Option<f64>,
    #[arg(long)]
    pub t2: Option<f64>,
    #[arg(long)]
    pub p_bit_flip: Option<f64>,
    #[arg(long)]
    pub p_phase_flip: Option<f64>,
    #[arg(long)]
    pub p_bit_phase_flip: Option<f64>,
    #[arg(long)]
    pub p_depolarizing: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub early_stop_rounds: Option<usize>,
    #[arg(long)]
    pub diversity_threshold: Option<f64>,
    /// mutate or replace
    #[arg(long)]
    pub diversity_action: Option<String>,
}

impl Cli {
    pub fn into_config(self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path).map_err(|e| Error::arg(e.to_string()))?,
            None => ExperimentConfig::default(),
        };
        if let Some(a) = &self.algorithm {
            cfg.algorithm = a.parse::<Algorithm>()?;
        }
        if let Some(a) = &self.diversity_action {
            cfg.ga.diversity_action = a.parse::<DiversityAction>()?;
        }
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag { cfg.$($field).+ = v; })*
            };
        }
        set!(
            qubits => n_qubits,
            population => ga.population_size,
            generations => ga.generations,
            t1 => noise.t1,
            t2 => noise.t2,
            p_bit_flip => noise.p_bit_flip,
            p_phase_flip => noise.p_phase_flip,
            p_bit_phase_flip => noise.p_bit_phase_flip,
            p_depolarizing => noise.p_depolarizing,
            seed => ga.master_seed,
            workers => workers,
            early_stop_rounds => ga.early_stop_rounds,
            diversity_threshold => ga.diversity_threshold,
        );
        if let Some(dir) = self.output_dir {
            cfg.output_dir = dir;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `args`, runs the experiment, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ARGUMENT } else { EXIT_OK };
        }
    };
    let cfg = match cli.into_config() {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ARGUMENT;
        }
    };
    match run_experiment(&cfg) {
        Ok(result) => {
            println!(
                "baseline {:.4}  best {:.4} (generation {})  best average {:.4}  {:.1}s",
                result.baseline_fidelity,
                result.best_fidelity,
                result.best_generation,
                result.best_avg_fidelity,
                result.wall_time_seconds
            );
            println!("results in {}", cfg.output_dir.display());
            EXIT_OK
        }
        Err(e @ Error::InvalidArgument(_)) => {
            eprintln!("error: {e}");
            EXIT_ARGUMENT
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<ExperimentConfig> {
        Cli::try_parse_from(std::iter::once("pulsefit").chain(args.iter().copied()))
            .map_err(|e| Error::arg(e.to_string()))?
            .into_config()
    }

    #[test]
    fn flags_override_defaults() {
        let cfg = parse(&[
            "--algorithm", "grover", "--qubits", "3", "--population", "8", "--t2", "20",
            "--seed", "42", "--diversity-action", "replace", "--p-depolarizing", "0.01",
        ])
        .unwrap();
        assert_eq!(cfg.algorithm, Algorithm::Grover);
        assert_eq!(cfg.n_qubits, 3);
        assert_eq!(cfg.ga.population_size, 8);
        assert_eq!(cfg.noise.t2, 20.0);
        assert_eq!(cfg.noise.p_depolarizing, 0.01);
        assert_eq!(cfg.ga.master_seed, 42);
        assert_eq!(cfg.ga.diversity_action, DiversityAction::Replace);
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"population_size": 30, "generations": 4, "t1": 70.0}"#).unwrap();
        let cfg = parse(&["--config", path.to_str().unwrap(), "--generations", "9"]).unwrap();
        assert_eq!(cfg.ga.population_size, 30);
        assert_eq!(cfg.ga.generations, 9);
        assert_eq!(cfg.noise.t1, 70.0);
    }

    #[test]
    fn argument_errors_exit_one() {
        assert_eq!(main_with_args(["pulsefit", "--qubits", "lots"]), EXIT_ARGUMENT);
        assert_eq!(main_with_args(["pulsefit", "--algorithm", "shor"]), EXIT_ARGUMENT);
        assert_eq!(main_with_args(["pulsefit", "--population", "1"]), EXIT_ARGUMENT);
        assert_eq!(main_with_args(["pulsefit", "--config", "/no/such/file.json"]), EXIT_ARGUMENT);
        assert_eq!(main_with_args(["pulsefit", "--help"]), EXIT_OK);
    }

    #[test]
    fn unwritable_output_exits_two() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let out = blocker.join("sub");
        let code = main_with_args([
            "pulsefit", "--qubits", "2", "--population", "4", "--generations", "0",
            "--output-dir", out.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_RUNTIME);
    }
}
