use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::SolverOptions;
use crate::ga::{self, baseline_genome, CircuitFitness, FitnessFunction};
use crate::pulse::{build_spin_chain_processor, Gene};

use super::config::ExperimentConfig;
use super::output::{plot_data, waveform_csv, write_generation_log, write_text, GenomeRecord};

pub const LOG_FILE: &str = "generation_log.csv";
pub const BEST_GENOME_FILE: &str = "best_genome.json";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub baseline_fidelity: f64,
    pub best_fidelity: f64,
    /// Highest population average over all generations.
    pub best_avg_fidelity: f64,
    pub best_generation: usize,
    pub generations_run: usize,
    pub stopped_early: bool,
    pub wall_time_seconds: f64,
    pub log_path: PathBuf,
    pub best_genome_path: PathBuf,
}

impl ExperimentResult {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn export_schedule(
    fitness: &CircuitFitness,
    genes: &[Gene],
    seed: u64,
    dir: &Path,
    tag: &str,
) -> Result<()> {
    let schedule = fitness.schedule(genes, seed)?;
    schedule.write_csv(&dir.join(format!("schedule_{tag}.csv")))?;
    let labels = fitness.processor().control_labels();
    write_text(&dir.join(format!("waveform_{tag}.csv")), &waveform_csv(&schedule, &labels)?)
}

/// Runs one baseline-versus-optimized experiment and writes its artifacts
/// into `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let dir = cfg.output_dir.as_path();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let circuit = cfg.algorithm.circuit(cfg.n_qubits)?;
    write_text(&dir.join("circuit.csv"), &circuit.to_text())?;
    write_text(&dir.join("config.json"), &cfg.to_json()?)?;

    let proc = build_spin_chain_processor(cfg.n_qubits)?;
    let fitness = CircuitFitness::new(circuit, proc, cfg.noise, SolverOptions::default())?;
    let baseline = baseline_genome(fitness.circuit());
    let baseline_seed = cfg.ga.master_seed;
    let baseline_fidelity = fitness.evaluate(&baseline, baseline_seed)?;

    let start = Instant::now();
    let outcome = ga::run(&cfg.ga, baseline.len(), &fitness, cfg.workers)?;
    let wall_time_seconds = start.elapsed().as_secs_f64();

    let log_path = dir.join(LOG_FILE);
    write_generation_log(&outcome.log, &log_path)?;
    write_text(&dir.join("plot_data.csv"), &plot_data(&outcome.log))?;

    let best = &outcome.best;
    let best_fidelity = best.fitness.unwrap_or(0.0);
    let best_genome_path = dir.join(BEST_GENOME_FILE);
    let record = GenomeRecord {
        genes: best.genes.clone(),
        fitness: best_fidelity,
        seed: best.seed,
    };
    write_text(&best_genome_path, &record.to_json()?)?;
    export_schedule(&fitness, &best.genes, best.seed, dir, "best")?;
    if cfg.run_baseline {
        export_schedule(&fitness, &baseline, baseline_seed, dir, "baseline")?;
    }

    let result = ExperimentResult {
        baseline_fidelity,
        best_fidelity,
        best_avg_fidelity: outcome.log.iter().map(|s| s.avg).fold(0.0, f64::max),
        best_generation: outcome.best_generation,
        generations_run: outcome.log.len() - 1,
        stopped_early: outcome.stopped_early,
        wall_time_seconds,
        log_path,
        best_genome_path,
    };
    write_text(&dir.join(SUMMARY_FILE), &result.to_json()?)?;
    Ok(result)
}
