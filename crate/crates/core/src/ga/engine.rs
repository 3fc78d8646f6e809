use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pulse::Gene;

use super::config::GAConfig;
use super::operators::{
    adjust_probabilities, apply_elitism, control_diversity, crossover, initialize_population, mutate,
    population_diversity, replace_population, should_stop_early, tournament_select, Individual,
};

/// Scores a genome. Must be deterministic in `(genes, seed)`.
pub trait FitnessFunction: Sync {
    fn evaluate(&self, genes: &[Gene], seed: u64) -> Result<f64>;
}

impl<F> FitnessFunction for F
where
    F: Fn(&[Gene], u64) -> Result<f64> + Sync,
{
    fn evaluate(&self, genes: &[Gene], seed: u64) -> Result<f64> {
        self(genes, seed)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenerationStats {
    pub gen: usize,
    pub nevals: usize,
    pub avg: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub diversity: f64,
    /// Probabilities used to breed this generation.
    pub p_mut: f64,
    pub p_cross: f64,
}

#[derive(Clone, Debug)]
pub struct GaOutcome {
    /// Best individual seen in any generation.
    pub best: Individual,
    /// Generation in which `best` first appeared.
    pub best_generation: usize,
    pub log: Vec<GenerationStats>,
    /// Every generation's fitness values in population order.
    pub fitness_history: Vec<Vec<f64>>,
    pub final_population: Vec<Individual>,
    pub stopped_early: bool,
    /// Evaluations that failed and were scored zero.
    pub failed_evaluations: usize,
}

/// Evaluates every individual without a fitness on `pool`, writing results
/// back in population order. Returns the number of evaluations.
fn evaluate_pending(
    pop: &mut [Individual],
    fitness: &dyn FitnessFunction,
    pool: &rayon::ThreadPool,
    failures: &mut usize,
) -> usize {
    let pending: Vec<usize> = (0..pop.len()).filter(|&i| pop[i].fitness.is_none()).collect();
    let jobs: Vec<(Vec<Gene>, u64)> = pending.iter().map(|&i| (pop[i].genes.clone(), pop[i].seed)).collect();
    let results: Vec<Result<f64>> = pool.install(|| {
        jobs.par_iter()
            .map(|(genes, seed)| fitness.evaluate(genes, *seed))
            .collect()
    });
    for (&i, r) in pending.iter().zip(results) {
        match r {
            Ok(f) if f.is_finite() => {
                pop[i].fitness = Some(f.clamp(0.0, 1.0));
                pop[i].failed = false;
            }
            _ => {
                pop[i].fitness = Some(0.0);
                pop[i].failed = true;
                *failures += 1;
            }
        }
    }
    pending.len()
}

fn stats(gen: usize, nevals: usize, pop: &[Individual], diversity: f64, p_mut: f64, p_cross: f64) -> GenerationStats {
    let values: Vec<f64> = pop.iter().map(|i| i.fitness.unwrap_or(0.0)).collect();
    let n = values.len() as f64;
    let avg = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - avg).powi(2)).sum::<f64>() / n;
    GenerationStats {
        gen,
        nevals,
        avg,
        std: var.sqrt(),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        diversity,
        p_mut,
        p_cross,
    }
}

fn best_index(pop: &[Individual]) -> usize {
    let mut best = 0;
    for (i, ind) in pop.iter().enumerate() {
        if ind.fitness > pop[best].fitness {
            best = i;
        }
    }
    best
}

/// Deterministic random stream for one phase of the run: stream 0 seeds the
/// initial population, stream `g` drives generation `g`.
fn stream(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Runs the adaptive GA over genomes of `n_genes` genes on `workers`
/// threads. The log is identical for any worker count.
pub fn run(cfg: &GAConfig, n_genes: usize, fitness: &dyn FitnessFunction, workers: usize) -> Result<GaOutcome> {
    cfg.validate()?;
    if workers == 0 {
        return Err(Error::arg("workers must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::arg(format!("cannot start worker pool: {e}")))?;
    let mut failures = 0usize;
    let mut p_mut = cfg.p_mut;
    let mut p_cross = cfg.p_cross;

    let mut pop = initialize_population(n_genes, cfg, &mut stream(cfg.master_seed, 0));
    let nevals = evaluate_pending(&mut pop, fitness, &pool, &mut failures);
    let mut log = vec![stats(0, nevals, &pop, population_diversity(&pop)?, p_mut, p_cross)];
    let mut fitness_history = vec![pop.iter().map(|i| i.fitness.unwrap_or(0.0)).collect::<Vec<_>>()];
    let mut best = pop[best_index(&pop)].clone();
    let mut best_generation = 0;
    let mut best_history = vec![best.fitness.unwrap_or(0.0)];
    let mut avg_history = vec![log[0].avg];
    let mut stopped_early = false;

    for gen in 1..=cfg.generations {
        let mut rng = stream(cfg.master_seed, gen as u64);
        let elite_idx = apply_elitism(&pop, cfg.elite_count)?;
        let elites: Vec<Individual> = elite_idx.iter().map(|&i| pop[i].clone()).collect();

        let mut offspring = Vec::with_capacity(cfg.population_size + 1);
        while offspring.len() < cfg.population_size {
            let p1 = tournament_select(&pop, cfg.tournament_size, &mut rng)?;
            let p2 = tournament_select(&pop, cfg.tournament_size, &mut rng)?;
            let (mut c1, mut c2) = crossover(p1, p2, p_cross, &mut rng)?;
            mutate(&mut c1, p_mut, cfg.sigma_scale, cfg, &mut rng);
            mutate(&mut c2, p_mut, cfg.sigma_scale, cfg, &mut rng);
            offspring.push(c1);
            offspring.push(c2);
        }
        offspring.truncate(cfg.population_size);
        let mut nevals = evaluate_pending(&mut offspring, fitness, &pool, &mut failures);

        let (next, elite_slots) = replace_population(offspring, &elites)?;
        pop = next;
        let diversity = population_diversity(&pop)?;
        control_diversity(&mut pop, &elite_slots, diversity, cfg, &mut rng)?;
        nevals += evaluate_pending(&mut pop, fitness, &pool, &mut failures);

        log.push(stats(gen, nevals, &pop, diversity, p_mut, p_cross));
        fitness_history.push(pop.iter().map(|i| i.fitness.unwrap_or(0.0)).collect());
        let leader = &pop[best_index(&pop)];
        if leader.fitness > best.fitness {
            best = leader.clone();
            best_generation = gen;
        }
        best_history.push(best.fitness.unwrap_or(0.0));
        avg_history.push(log[gen].avg);
        (p_mut, p_cross) = adjust_probabilities(&avg_history, cfg, p_mut, p_cross);
        if should_stop_early(&best_history, cfg.early_stop_rounds, cfg.epsilon) {
            stopped_early = true;
            break;
        }
    }

    Ok(GaOutcome {
        best,
        best_generation,
        log,
        fitness_history,
        final_population: pop,
        stopped_early,
        failed_evaluations: failures,
    })
}
