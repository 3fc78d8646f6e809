//! Gradient-ascent pulse engineering for a target unitary.
//!
//! The objective is the phase-insensitive gate fidelity
//! `Φ = |Tr(W†·U_K⋯U_1)|² / d²` with `U_k = exp(−iΔt·H_k)`. Each slice
//! propagator comes from the eigendecomposition of its Hamiltonian, which
//! also gives the exact derivative of `U_k` with respect to every control
//! amplitude.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::qmath::{matrix_exponential, ComplexMatrix, C64, I, ZERO};

use super::processor::Processor;

#[derive(Clone, Debug, PartialEq)]
pub struct GrapeOptions {
    pub max_iterations: usize,
    /// Stop once an accepted step improves `Φ` by less than this.
    pub min_improvement: f64,
    /// Largest amplitude change, as a fraction of `u_max`, of a plain
    /// gradient step. Used whenever the quasi-Newton history is empty.
    pub learning_rate: f64,
    /// Initial amplitudes are uniform in `±init_fraction·u_max`.
    pub init_fraction: f64,
    /// Extra runs from fresh random starts while the best `Φ` is below
    /// `restart_below`.
    pub restarts: usize,
    pub restart_below: f64,
}

impl Default for GrapeOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            min_improvement: 1e-9,
            learning_rate: 0.1,
            init_fraction: 0.3,
            restarts: 2,
            restart_below: 0.99,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrapeResult {
    /// `amplitudes[k][j]`: slice `k`, control `j` of the processor.
    pub amplitudes: Vec<Vec<f64>>,
    pub slice_duration: f64,
    pub fidelity: f64,
    /// Accepted steps summed over all starts.
    pub iterations: usize,
}

struct SliceEigen {
    values: Vec<f64>,
    vectors: ComplexMatrix,
    propagator: ComplexMatrix,
}

struct Evaluation {
    slices: Vec<SliceEigen>,
    /// `Tr(W†·U_K⋯U_1)`
    overlap: C64,
    fidelity: f64,
}

struct Problem<'a> {
    target_adj: ComplexMatrix,
    proc: &'a Processor,
    dt: f64,
    dim: usize,
    slots: usize,
}

impl Problem<'_> {
    fn evaluate(&self, amps: &[Vec<f64>]) -> Evaluation {
        let mut total = ComplexMatrix::identity(self.dim);
        let mut slices = Vec::with_capacity(amps.len());
        for a in amps {
            let h = self.proc.hamiltonian(a);
            let (values, vectors) = h.hermitian_eigen();
            let phases: Vec<C64> = values.iter().map(|&l| C64::from_polar(1.0, -l * self.dt)).collect();
            let propagator = &scale_columns(&vectors, &phases) * &vectors.adjoint();
            total = &propagator * &total;
            slices.push(SliceEigen {
                values,
                vectors,
                propagator,
            });
        }
        let overlap = (&self.target_adj * &total).trace();
        let d2 = (self.dim * self.dim) as f64;
        Evaluation {
            slices,
            overlap,
            fidelity: overlap.norm_sqr() / d2,
        }
    }

    /// `∂Φ/∂u_{k,j}` for every slice `k` and control `j`.
    fn gradient(&self, ev: &Evaluation) -> Vec<Vec<f64>> {
        let n = ev.slices.len();
        // forward[k] = U_k⋯U_1 (forward[0] = I)
        let mut forward = Vec::with_capacity(n + 1);
        forward.push(ComplexMatrix::identity(self.dim));
        for s in &ev.slices {
            let next = &s.propagator * forward.last().expect("non-empty");
            forward.push(next);
        }
        // back = W†·U_K⋯U_{k+1}, walked from the last slice down
        let mut back = self.target_adj.clone();
        let d2 = (self.dim * self.dim) as f64;
        let mut grad = vec![Vec::new(); n];
        for k in (0..n).rev() {
            let s = &ev.slices[k];
            let m = &forward[k] * &back;
            let m_eig = &(&s.vectors.adjoint() * &m) * &s.vectors;
            let g = divided_differences(&s.values, self.dt);
            let mut row = Vec::with_capacity(self.proc.n_controls());
            for j in 0..self.proc.n_controls() {
                let hj = &(&s.vectors.adjoint() * self.proc.control(j)) * &s.vectors;
                let mut d_overlap = ZERO;
                for a in 0..self.dim {
                    for b in 0..self.dim {
                        d_overlap += m_eig.get(b, a) * g[a * self.dim + b] * hj.get(a, b);
                    }
                }
                row.push(2.0 * (ev.overlap.conj() * d_overlap).re / d2);
            }
            grad[k] = row;
            back = &back * &s.propagator;
        }
        grad
    }
}

fn scale_columns(m: &ComplexMatrix, s: &[C64]) -> ComplexMatrix {
    let mut out = m.clone();
    for c in 0..m.cols() {
        for r in 0..m.rows() {
            out.set(r, c, m.get(r, c) * s[c]);
        }
    }
    out
}

/// `G_ab = (e^{−iΔtλ_a} − e^{−iΔtλ_b}) / (λ_a − λ_b)`, written as
/// `−iΔt·e^{−iΔt(λ_a+λ_b)/2}·sinc(Δt(λ_a−λ_b)/2)` so equal eigenvalues need
/// no special case.
fn divided_differences(values: &[f64], dt: f64) -> Vec<C64> {
    let n = values.len();
    let mut g = vec![ZERO; n * n];
    for a in 0..n {
        for b in 0..n {
            let mean = 0.5 * (values[a] + values[b]);
            let x = 0.5 * dt * (values[a] - values[b]);
            let sinc = if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x };
            g[a * n + b] = -I * dt * C64::from_polar(1.0, -dt * mean) * sinc;
        }
    }
    g
}

const LBFGS_MEMORY: usize = 10;
const ARMIJO: f64 = 1e-4;

fn flatten(rows: &[Vec<f64>]) -> Vec<f64> {
    rows.iter().flatten().copied().collect()
}

fn unflatten(x: &[f64], width: usize) -> Vec<Vec<f64>> {
    x.chunks(width).map(|c| c.to_vec()).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Limited-memory BFGS history for minimizing `−Φ`.
struct Lbfgs {
    capacity: usize,
    pairs: std::collections::VecDeque<(Vec<f64>, Vec<f64>, f64)>,
}

impl Lbfgs {
    fn new(capacity: usize) -> Self {
        Self {
            capacity,
            pairs: std::collections::VecDeque::with_capacity(capacity),
        }
    }

    fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    fn clear(&mut self) {
        self.pairs.clear();
    }

    fn push(&mut self, s: Vec<f64>, y: Vec<f64>) {
        let sy = dot(&s, &y);
        if sy <= 1e-16 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() || sy <= 0.0 {
            return;
        }
        if self.pairs.len() == self.capacity {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s, y, 1.0 / sy));
    }

    /// Ascent direction `H·g` by the two-loop recursion.
    fn direction(&self, grad: &[f64]) -> Vec<f64> {
        let mut q = grad.to_vec();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = self.pairs.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y, rho), a) in self.pairs.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        q
    }
}

/// Maximizes `Φ` over amplitudes bounded by the processor's `u_max`.
pub fn optimize_unitary(
    target: &ComplexMatrix,
    proc: &Processor,
    evo_time: f64,
    num_tslots: usize,
    seed: u64,
    opts: &GrapeOptions,
) -> Result<GrapeResult> {
    if num_tslots == 0 {
        return Err(Error::arg("num_tslots must be at least 1"));
    }
    if !(evo_time > 0.0) || !evo_time.is_finite() {
        return Err(Error::arg("evo_time must be positive and finite"));
    }
    if !target.is_square() || target.rows() != proc.dim() {
        return Err(Error::arg("target dimension does not match the processor"));
    }
    let problem = Problem {
        target_adj: target.adjoint(),
        proc,
        dt: evo_time / num_tslots as f64,
        dim: proc.dim(),
        slots: num_tslots,
    };

    let mut best = single_start(&problem, seed, opts)?;
    for r in 1..=opts.restarts {
        if best.fidelity >= opts.restart_below {
            break;
        }
        let retry = single_start(&problem, seed ^ (r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15), opts)?;
        let iterations = best.iterations + retry.iterations;
        if retry.fidelity > best.fidelity {
            best = retry;
        }
        best.iterations = iterations;
    }
    Ok(best)
}

fn single_start(problem: &Problem, seed: u64, opts: &GrapeOptions) -> Result<GrapeResult> {
    let u_max = problem.proc.u_max();
    let m = problem.proc.n_controls();
    let num_tslots = problem.slots;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = opts.init_fraction * u_max;
    let amps: Vec<Vec<f64>> = (0..num_tslots)
        .map(|_| (0..m).map(|_| rng.random_range(-bound..=bound)).collect())
        .collect();

    let mut current = problem.evaluate(&amps);
    let mut grad = flatten(&problem.gradient(&current));
    let mut x = flatten(&amps);
    let mut memory = Lbfgs::new(LBFGS_MEMORY);
    let mut iterations = 0;
    while iterations < opts.max_iterations && current.fidelity < 1.0 - 1e-14 {
        let mut direction = memory.direction(&grad);
        if !(dot(&grad, &direction) > 0.0) {
            memory.clear();
            direction = grad.clone();
        }
        let mut step = if memory.is_empty() {
            opts.learning_rate / inf_norm(&grad).max(1e-300) * u_max
        } else {
            1.0
        };
        let mut accepted = None;
        while step > 1e-14 {
            let candidate: Vec<f64> = x
                .iter()
                .zip(&direction)
                .map(|(u, d)| (u + step * d).clamp(-u_max, u_max))
                .collect();
            let ev = problem.evaluate(&unflatten(&candidate, m));
            let moved: f64 = grad.iter().zip(candidate.iter().zip(&x)).map(|(g, (c, u))| g * (c - u)).sum();
            if ev.fidelity > current.fidelity + ARMIJO * moved.max(0.0) {
                accepted = Some((candidate, ev));
                break;
            }
            step *= 0.5;
        }
        let Some((candidate, ev)) = accepted else {
            if memory.is_empty() {
                break;
            }
            memory.clear();
            continue;
        };
        iterations += 1;
        let improvement = ev.fidelity - current.fidelity;
        let new_grad = flatten(&problem.gradient(&ev));
        let s_vec: Vec<f64> = candidate.iter().zip(&x).map(|(a, b)| a - b).collect();
        // curvature pair for the minimization of −Φ
        let y_vec: Vec<f64> = grad.iter().zip(&new_grad).map(|(g0, g1)| g0 - g1).collect();
        memory.push(s_vec, y_vec);
        x = candidate;
        grad = new_grad;
        current = ev;
        if improvement < opts.min_improvement {
            break;
        }
    }
    let amps = unflatten(&x, m);

    Ok(GrapeResult {
        amplitudes: amps,
        slice_duration: problem.dt,
        fidelity: current.fidelity,
        iterations,
    })
}

/// Gate fidelity of piecewise-constant `amplitudes` recomputed by a plain
/// product of Padé slice exponentials, independent of the optimizer's
/// eigendecomposition route.
pub fn gate_fidelity(
    target: &ComplexMatrix,
    proc: &Processor,
    amplitudes: &[Vec<f64>],
    slice_duration: f64,
) -> Result<f64> {
    let mut total = ComplexMatrix::identity(proc.dim());
    for a in amplitudes {
        let h = proc.hamiltonian(a);
        let u = matrix_exponential(&h.scale(-I * slice_duration))?;
        total = &u * &total;
    }
    let d = proc.dim() as f64;
    Ok((&target.adjoint() * &total).trace().norm_sqr() / (d * d))
}
