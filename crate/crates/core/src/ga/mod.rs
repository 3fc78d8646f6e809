//! Adaptive genetic algorithm over per-gate pulse parameters.

mod config;
mod engine;
mod fitness;
mod operators;

pub use config::{DiversityAction, GAConfig, P_CROSS_RANGE, P_MUT_RANGE, REPLACE_FRACTION};
pub use engine::{run, FitnessFunction, GaOutcome, GenerationStats};
pub use fitness::{baseline_genome, evaluate_fitness, CircuitFitness};
pub use operators::{
    adjust_probabilities, apply_elitism, control_diversity, crossover, initialize_population, mutate,
    population_diversity, random_individual, replace_population, should_stop_early, tournament_select,
    Individual,
};
