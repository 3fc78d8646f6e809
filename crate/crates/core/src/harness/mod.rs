//! Experiment configuration, the baseline-versus-optimized run, and its
//! CSV/JSON artifacts.

pub mod cli;
mod config;
mod experiment;
mod output;

pub use config::{Algorithm, ExperimentConfig};
pub use experiment::{run_experiment, ExperimentResult, BEST_GENOME_FILE, LOG_FILE, SUMMARY_FILE};
pub use output::{
    emit_plot_data, format_generation_log, parse_generation_log, plot_data, waveform_csv, write_generation_log,
    GenomeRecord, LOG_HEADER, PLOT_HEADER,
};
