use crate::circuits::{ideal_output_state, Circuit};
use crate::error::{Error, Result};
use crate::evolve::{propagate, SolverOptions};
use crate::noise::{build_collapse_operators, NoiseParams};
use crate::pulse::{schedule_for_circuit, CompilationCache, Gene, Processor, PulseSchedule};
use crate::qmath::{state_fidelity, DensityMatrix};

use super::engine::FitnessFunction;

/// Default pulse per gate: `(1.0, 10)` for single-qubit gates and
/// `(3.0, 12)` for two-qubit gates.
pub fn baseline_genome(circuit: &Circuit) -> Vec<Gene> {
    circuit
        .gates
        .iter()
        .map(|g| {
            if g.acting_qubits.len() == 1 {
                Gene::new(1.0, 10)
            } else {
                Gene::new(3.0, 12)
            }
        })
        .collect()
}

/// Fidelity of the pulse-level simulation of `circuit` against its ideal
/// output, with a shared compilation cache.
pub struct CircuitFitness {
    circuit: Circuit,
    proc: Processor,
    noise: NoiseParams,
    target: DensityMatrix,
    cache: CompilationCache,
    solver: SolverOptions,
}

impl CircuitFitness {
    pub fn new(circuit: Circuit, proc: Processor, noise: NoiseParams, solver: SolverOptions) -> Result<Self> {
        if proc.n_qubits() != circuit.n_qubits {
            return Err(Error::arg(format!(
                "{}-qubit circuit on a {}-qubit processor",
                circuit.n_qubits,
                proc.n_qubits()
            )));
        }
        noise.validate()?;
        solver.validate()?;
        let target = ideal_output_state(&circuit)?.to_density();
        Ok(Self {
            circuit,
            proc,
            noise,
            target,
            cache: CompilationCache::new(),
            solver,
        })
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn processor(&self) -> &Processor {
        &self.proc
    }

    pub fn target(&self) -> &DensityMatrix {
        &self.target
    }

    pub fn cache(&self) -> &CompilationCache {
        &self.cache
    }

    pub fn schedule(&self, genes: &[Gene], seed: u64) -> Result<PulseSchedule> {
        schedule_for_circuit(&self.circuit.gates, &self.proc, genes, seed, &self.cache)
    }

    /// Final density matrix of the noisy pulse-level run from `|0…0⟩`.
    pub fn final_state(&self, genes: &[Gene], seed: u64) -> Result<DensityMatrix> {
        let schedule = self.schedule(genes, seed)?;
        let rho0 = DensityMatrix::basis(self.proc.dim(), 0)?;
        if schedule.is_empty() {
            return Ok(rho0);
        }
        let collapse = build_collapse_operators(&self.noise, self.circuit.n_qubits, schedule.total_time())?;
        propagate(&rho0, &schedule, &self.proc, &collapse, &self.solver)
    }
}

impl FitnessFunction for CircuitFitness {
    fn evaluate(&self, genes: &[Gene], seed: u64) -> Result<f64> {
        state_fidelity(&self.final_state(genes, seed)?, &self.target)
    }
}

/// One-off evaluation of a genome against a circuit.
pub fn evaluate_fitness(
    genes: &[Gene],
    seed: u64,
    circuit: &Circuit,
    proc: &Processor,
    noise: &NoiseParams,
    solver: &SolverOptions,
) -> Result<f64> {
    CircuitFitness::new(circuit.clone(), proc.clone(), noise.clone(), solver.clone())?.evaluate(genes, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::build_deutsch_jozsa;
    use crate::pulse::build_spin_chain_processor;

    #[test]
    fn baseline_shapes() {
        let c = build_deutsch_jozsa(1).unwrap();
        let g = baseline_genome(&c);
        assert_eq!(g.len(), 5);
        assert_eq!(g[0], Gene::new(1.0, 10));
        assert_eq!(g[3], Gene::new(3.0, 12));
    }

    #[test]
    fn noiseless_deutsch_jozsa_is_faithful() {
        let c = build_deutsch_jozsa(1).unwrap();
        let genes = baseline_genome(&c);
        let p = build_spin_chain_processor(2).unwrap();
        let f = CircuitFitness::new(c, p, NoiseParams::noiseless(), SolverOptions::default()).unwrap();
        let a = f.evaluate(&genes, 4).unwrap();
        assert!(a >= 0.99, "{a}");
        assert_eq!(f.evaluate(&genes, 4).unwrap(), a);
    }

    #[test]
    fn noise_costs_fidelity() {
        let c = build_deutsch_jozsa(1).unwrap();
        let genes = baseline_genome(&c);
        let p = build_spin_chain_processor(2).unwrap();
        let noisy = evaluate_fitness(&genes, 1, &c, &p, &NoiseParams::default(), &SolverOptions::default()).unwrap();
        assert!((0.0..0.99).contains(&noisy), "{noisy}");
    }

    #[test]
    fn mismatched_processor() {
        let c = build_deutsch_jozsa(1).unwrap();
        let p = build_spin_chain_processor(3).unwrap();
        assert!(CircuitFitness::new(c, p, NoiseParams::noiseless(), SolverOptions::default()).is_err());
    }
}
