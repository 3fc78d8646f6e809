use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::pulse::Gene;

use super::config::{DiversityAction, GAConfig, P_CROSS_RANGE, P_MUT_RANGE, REPLACE_FRACTION};

/// One candidate: a pulse gene per circuit gate plus the GRAPE seed used to
/// compile it.
#[derive(Clone, Debug, PartialEq)]
pub struct Individual {
    pub genes: Vec<Gene>,
    pub fitness: Option<f64>,
    pub seed: u64,
    /// Set when evaluation failed and the fitness was recorded as zero.
    pub failed: bool,
}

impl Individual {
    pub fn new(genes: Vec<Gene>, seed: u64) -> Self {
        Self {
            genes,
            fitness: None,
            seed,
            failed: false,
        }
    }

    fn clear_fitness(&mut self) {
        self.fitness = None;
        self.failed = false;
    }

    /// Genome as a real vector `[evo_0, slots_0, evo_1, slots_1, ...]`.
    pub fn flatten(&self) -> Vec<f64> {
        self.genes
            .iter()
            .flat_map(|g| [g.evo_time, g.num_tslots as f64])
            .collect()
    }

    pub fn in_bounds(&self, cfg: &GAConfig) -> bool {
        self.genes.iter().all(|g| {
            (cfg.evo_min..=cfg.evo_max).contains(&g.evo_time)
                && (cfg.slot_min..=cfg.slot_max).contains(&g.num_tslots)
        })
    }
}

pub(crate) fn fitness_of(pop: &[Individual], i: usize) -> Result<f64> {
    pop[i].fitness.ok_or(Error::Unevaluated(i))
}

pub fn random_individual<R: Rng>(n_genes: usize, cfg: &GAConfig, rng: &mut R) -> Individual {
    let genes = (0..n_genes)
        .map(|_| {
            Gene::new(
                rng.random_range(cfg.evo_min..=cfg.evo_max),
                rng.random_range(cfg.slot_min..=cfg.slot_max),
            )
        })
        .collect();
    Individual::new(genes, rng.random())
}

pub fn initialize_population<R: Rng>(n_genes: usize, cfg: &GAConfig, rng: &mut R) -> Vec<Individual> {
    (0..cfg.population_size)
        .map(|_| random_individual(n_genes, cfg, rng))
        .collect()
}

/// Best of `k` distinct members drawn uniformly; ties go to the first drawn.
pub fn tournament_select<'a, R: Rng>(pop: &'a [Individual], k: usize, rng: &mut R) -> Result<&'a Individual> {
    if k == 0 || k > pop.len() {
        return Err(Error::arg(format!("tournament size {k} for population of {}", pop.len())));
    }
    let mut best: Option<(usize, f64)> = None;
    for i in sample(rng, pop.len(), k) {
        let f = fitness_of(pop, i)?;
        if best.is_none_or(|(_, b)| f > b) {
            best = Some((i, f));
        }
    }
    Ok(&pop[best.expect("k >= 1").0])
}

/// Uniform crossover with probability `p_cross`: each gene position is
/// exchanged with probability ½. Children keep their parent's seed.
pub fn crossover<R: Rng>(
    p1: &Individual,
    p2: &Individual,
    p_cross: f64,
    rng: &mut R,
) -> Result<(Individual, Individual)> {
    if p1.genes.len() != p2.genes.len() {
        return Err(Error::arg(format!(
            "cannot cross genomes of length {} and {}",
            p1.genes.len(),
            p2.genes.len()
        )));
    }
    let mut c1 = p1.clone();
    let mut c2 = p2.clone();
    if rng.random::<f64>() < p_cross {
        for i in 0..c1.genes.len() {
            if rng.random::<f64>() < 0.5 {
                std::mem::swap(&mut c1.genes[i], &mut c2.genes[i]);
            }
        }
        c1.clear_fitness();
        c2.clear_fitness();
    }
    Ok((c1, c2))
}

const SLOT_STEPS: [i64; 4] = [-2, -1, 1, 2];

/// Each gene mutates with probability `p_mut`: Gaussian noise on `evo_time`
/// and a step of ±1 or ±2 on `num_tslots`, both clamped to the bounds.
pub fn mutate<R: Rng>(ind: &mut Individual, p_mut: f64, sigma_scale: f64, cfg: &GAConfig, rng: &mut R) {
    let sigma = sigma_scale * (cfg.evo_max - cfg.evo_min);
    let noise = Normal::new(0.0, sigma).ok();
    let mut changed = false;
    for g in &mut ind.genes {
        if rng.random::<f64>() >= p_mut {
            continue;
        }
        let before = *g;
        if let Some(n) = noise.filter(|_| sigma > 0.0) {
            g.evo_time = (g.evo_time + n.sample(rng)).clamp(cfg.evo_min, cfg.evo_max);
        }
        let step = SLOT_STEPS[rng.random_range(0..SLOT_STEPS.len())];
        g.num_tslots = (g.num_tslots as i64 + step).clamp(cfg.slot_min as i64, cfg.slot_max as i64) as u32;
        changed |= *g != before;
    }
    if changed {
        ind.clear_fitness();
    }
}

/// Indices of the `count` fittest individuals, best first; ties keep
/// population order.
pub fn apply_elitism(pop: &[Individual], count: usize) -> Result<Vec<usize>> {
    let mut order = (0..pop.len())
        .map(|i| fitness_of(pop, i).map(|f| (i, f)))
        .collect::<Result<Vec<_>>>()?;
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(order.into_iter().take(count).map(|(i, _)| i).collect())
}

/// The offspring become the new population, except that the worst offspring
/// give way to unmodified copies of `elites`. Returns the population and the
/// positions the elites were placed at.
pub fn replace_population(
    offspring: Vec<Individual>,
    elites: &[Individual],
) -> Result<(Vec<Individual>, Vec<usize>)> {
    if elites.len() > offspring.len() {
        return Err(Error::arg("more elites than offspring"));
    }
    let mut order = (0..offspring.len())
        .map(|i| fitness_of(&offspring, i).map(|f| (i, f)))
        .collect::<Result<Vec<_>>>()?;
    // worst first; among equals the later one goes first
    order.sort_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
    let mut pop = offspring;
    let mut slots: Vec<usize> = order.iter().take(elites.len()).map(|(i, _)| *i).collect();
    for (slot, elite) in slots.iter().zip(elites) {
        pop[*slot] = elite.clone();
    }
    slots.sort_unstable();
    Ok((pop, slots))
}

/// Average pairwise Mahalanobis distance under the sample covariance of the
/// flattened genomes, regularized by `1e-6·I`.
pub fn population_diversity(pop: &[Individual]) -> Result<f64> {
    let n = pop.len();
    if n < 2 {
        return Err(Error::arg("diversity needs at least two individuals"));
    }
    let rows: Vec<Vec<f64>> = pop.iter().map(Individual::flatten).collect();
    let dim = rows[0].len();
    if dim == 0 {
        return Ok(0.0);
    }
    if rows.iter().any(|r| r.len() != dim) {
        return Err(Error::arg("genomes differ in length"));
    }
    let x = DMatrix::from_fn(n, dim, |i, j| rows[i][j]);
    let cov = covariance(&x) + DMatrix::identity(dim, dim) * COVARIANCE_RIDGE;
    let chol = cov
        .cholesky()
        .ok_or_else(|| Error::NumericalInstability("genome covariance is not positive definite".into()))?;
    // with Σ = LLᵀ, the Mahalanobis distance is Euclidean after y = L⁻¹x
    let whitened: Vec<DVector<f64>> = (0..n)
        .map(|i| {
            let mut y = x.row(i).transpose();
            chol.l_dirty().solve_lower_triangular_mut(&mut y);
            y
        })
        .collect();
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            total += (&whitened[i] - &whitened[j]).norm();
        }
    }
    Ok(2.0 * total / (n * (n - 1)) as f64)
}

pub(crate) const COVARIANCE_RIDGE: f64 = 1e-6;

/// Unbiased sample covariance of the rows of `x`.
pub(crate) fn covariance(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let mean = x.row_mean();
    let mut centered = x.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    centered.transpose() * &centered / (n as f64 - 1.0)
}

/// Applies the configured diversity action in place when `diversity` is
/// below the threshold. Elites are left untouched. Returns the indices whose
/// fitness was cleared and must be re-evaluated.
pub fn control_diversity<R: Rng>(
    pop: &mut [Individual],
    elites: &[usize],
    diversity: f64,
    cfg: &GAConfig,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if diversity >= cfg.diversity_threshold {
        return Ok(Vec::new());
    }
    let n_genes = pop.first().map_or(0, |i| i.genes.len());
    let affected: Vec<usize> = match cfg.diversity_action {
        DiversityAction::Mutate => (0..pop.len()).filter(|i| !elites.contains(i)).collect(),
        DiversityAction::Replace => {
            let count = (REPLACE_FRACTION * pop.len() as f64).floor() as usize;
            let mut order = (0..pop.len())
                .filter(|i| !elites.contains(i))
                .map(|i| fitness_of(pop, i).map(|f| (i, f)))
                .collect::<Result<Vec<_>>>()?;
            order.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            let mut worst: Vec<usize> = order.into_iter().take(count).map(|(i, _)| i).collect();
            worst.sort_unstable();
            worst
        }
    };
    for &i in &affected {
        match cfg.diversity_action {
            DiversityAction::Mutate => mutate(&mut pop[i], 1.0, 2.0 * cfg.sigma_scale, cfg, rng),
            DiversityAction::Replace => pop[i] = random_individual(n_genes, cfg, rng),
        }
        pop[i].clear_fitness();
    }
    Ok(affected)
}

/// Raises both probabilities by `delta_p` when the average fitness gained
/// less than `delta` over the last `interval` generations, lowers them
/// otherwise, then clamps. Only acts on generations that are a positive
/// multiple of `interval`.
pub fn adjust_probabilities(avg_history: &[f64], cfg: &GAConfig, p_mut: f64, p_cross: f64) -> (f64, f64) {
    let Some(g) = avg_history.len().checked_sub(1) else {
        return (p_mut, p_cross);
    };
    if g == 0 || g < cfg.interval || g % cfg.interval != 0 {
        return (p_mut, p_cross);
    }
    let gain = avg_history[g] - avg_history[g - cfg.interval];
    let step = if gain < cfg.delta { cfg.delta_p } else { -cfg.delta_p };
    (
        (p_mut + step).clamp(P_MUT_RANGE.0, P_MUT_RANGE.1),
        (p_cross + step).clamp(P_CROSS_RANGE.0, P_CROSS_RANGE.1),
    )
}

/// `best[g] − best[g−R] < ε` for the latest generation `g ≥ R`.
pub fn should_stop_early(best_history: &[f64], rounds: usize, epsilon: f64) -> bool {
    let Some(g) = best_history.len().checked_sub(1) else {
        return false;
    };
    rounds > 0 && g >= rounds && best_history[g] - best_history[g - rounds] < epsilon
}
