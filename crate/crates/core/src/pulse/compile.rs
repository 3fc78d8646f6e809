use std::collections::HashMap;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::qmath::{ComplexMatrix, ZERO};

use super::grape::{optimize_unitary, GrapeOptions};
use super::processor::Processor;
use super::schedule::{Gene, PulseSchedule, Slice};

const UNITARY_TOLERANCE: f64 = 1e-10;

/// A named gate acting on `acting_qubits`, listed most significant first
/// in the order `target_unitary` expects.
#[derive(Clone, Debug, PartialEq)]
pub struct GateSpec {
    pub name: String,
    pub target_unitary: ComplexMatrix,
    pub acting_qubits: Vec<usize>,
}

impl GateSpec {
    pub fn new(name: impl Into<String>, target_unitary: ComplexMatrix, acting_qubits: Vec<usize>) -> Result<Self> {
        let name = name.into();
        if acting_qubits.is_empty() {
            return Err(Error::arg(format!("gate {name} acts on no qubits")));
        }
        let mut sorted = acting_qubits.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != acting_qubits.len() {
            return Err(Error::arg(format!("gate {name} repeats a qubit")));
        }
        let dim = 1usize << acting_qubits.len();
        if !target_unitary.is_square() || target_unitary.rows() != dim {
            return Err(Error::arg(format!(
                "gate {name} on {} qubits needs a {dim}x{dim} unitary",
                acting_qubits.len()
            )));
        }
        let dev = target_unitary.unitarity_deviation();
        if dev > UNITARY_TOLERANCE {
            return Err(Error::arg(format!("gate {name} is not unitary (deviation {dev:e})")));
        }
        Ok(Self {
            name,
            target_unitary,
            acting_qubits,
        })
    }

    /// Smallest contiguous block `(first, len)` containing every acting qubit.
    pub fn span(&self) -> (usize, usize) {
        let lo = *self.acting_qubits.iter().min().expect("non-empty");
        let hi = *self.acting_qubits.iter().max().expect("non-empty");
        (lo, hi - lo + 1)
    }

    /// The gate as an operator on its span, identity on the spectator qubits.
    pub fn span_unitary(&self) -> ComplexMatrix {
        let (first, len) = self.span();
        let local: Vec<usize> = self.acting_qubits.iter().map(|q| q - first).collect();
        embed(&self.target_unitary, &local, len)
    }

    /// The gate on an `n_qubits` register.
    pub fn full_unitary(&self, n_qubits: usize) -> Result<ComplexMatrix> {
        if self.acting_qubits.iter().any(|&q| q >= n_qubits) {
            return Err(Error::arg(format!(
                "gate {} acts outside the {n_qubits}-qubit register",
                self.name
            )));
        }
        Ok(embed(&self.target_unitary, &self.acting_qubits, n_qubits))
    }

    fn cache_identity(&self) -> (String, Vec<usize>, u64) {
        let (first, len) = self.span();
        let rel = self.acting_qubits.iter().map(|q| q - first).collect();
        let mut h = DefaultHasher::new();
        len.hash(&mut h);
        for z in self.target_unitary.as_slice() {
            z.re.to_bits().hash(&mut h);
            z.im.to_bits().hash(&mut h);
        }
        (self.name.clone(), rel, h.finish())
    }
}

/// Places `op` (on `qubits`, most significant first) inside an `n`-qubit
/// register by permuting basis indices.
fn embed(op: &ComplexMatrix, qubits: &[usize], n: usize) -> ComplexMatrix {
    let k = qubits.len();
    let dim = 1usize << n;
    let bit = |q: usize| n - 1 - q;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut sub_col = 0usize;
        for &q in qubits {
            sub_col = (sub_col << 1) | ((col >> bit(q)) & 1);
        }
        let mut rest = col;
        for &q in qubits {
            rest &= !(1 << bit(q));
        }
        for sub_row in 0..(1usize << k) {
            let v = op.get(sub_row, sub_col);
            if v == ZERO {
                continue;
            }
            let mut row = rest;
            for (i, &q) in qubits.iter().enumerate() {
                if (sub_row >> (k - 1 - i)) & 1 == 1 {
                    row |= 1 << bit(q);
                }
            }
            out.set(row, col, v);
        }
    }
    out
}

/// GRAPE output for one gate: amplitudes on the span's local controls.
#[derive(Clone, Debug, PartialEq)]
pub struct CompiledGate {
    pub gate_name: String,
    pub span: (usize, usize),
    /// Global control index for each local control column.
    pub control_index: Vec<usize>,
    pub local_amplitudes: Vec<Vec<f64>>,
    pub slice_duration: f64,
    pub fidelity: f64,
    pub iterations: usize,
}

impl CompiledGate {
    /// The compiled pulse on the processor's full control set.
    pub fn schedule(&self, n_controls: usize, gate_index: usize) -> PulseSchedule {
        let mut s = PulseSchedule::new(n_controls);
        for row in &self.local_amplitudes {
            let mut amplitudes = vec![0.0; n_controls];
            for (&g, &u) in self.control_index.iter().zip(row) {
                amplitudes[g] = u;
            }
            s.push(Slice {
                gate_index,
                duration: self.slice_duration,
                amplitudes,
            })
            .expect("compiled slice is well formed");
        }
        s
    }
}

/// Compiles `gate` using only the controls supported on the qubits it spans.
pub fn grape_compile(
    gate: &GateSpec,
    proc: &Processor,
    evo_time: f64,
    num_tslots: usize,
    seed: u64,
) -> Result<CompiledGate> {
    grape_compile_with(gate, proc, evo_time, num_tslots, seed, &GrapeOptions::default())
}

pub fn grape_compile_with(
    gate: &GateSpec,
    proc: &Processor,
    evo_time: f64,
    num_tslots: usize,
    seed: u64,
    opts: &GrapeOptions,
) -> Result<CompiledGate> {
    let (first, len) = gate.span();
    if first + len > proc.n_qubits() {
        return Err(Error::arg(format!(
            "gate {} acts outside the {}-qubit processor",
            gate.name,
            proc.n_qubits()
        )));
    }
    let (local_proc, control_index, target, span) = if proc.drift().max_abs() == 0.0 {
        let (lp, idx) = proc.restrict(first, len)?;
        (lp, idx, gate.span_unitary(), (first, len))
    } else {
        let n = proc.n_qubits();
        (
            proc.clone(),
            (0..proc.n_controls()).collect(),
            gate.full_unitary(n)?,
            (0, n),
        )
    };
    let r = optimize_unitary(&target, &local_proc, evo_time, num_tslots, seed, opts)?;
    Ok(CompiledGate {
        gate_name: gate.name.clone(),
        span,
        control_index,
        local_amplitudes: r.amplitudes,
        slice_duration: r.slice_duration,
        fidelity: r.fidelity,
        iterations: r.iterations,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct CacheKey {
    name: String,
    relative_qubits: Vec<usize>,
    unitary_hash: u64,
    evo_time_bits: u64,
    num_tslots: u32,
    seed: u64,
}

/// Shared memo of compiled gates.
///
/// Keyed on the gate's shape relative to its span, so the same gate on
/// different qubits compiles once. Concurrent duplicate compiles are
/// allowed; the results are identical and the last insert wins.
#[derive(Debug, Default)]
pub struct CompilationCache {
    entries: RwLock<HashMap<CacheKey, Arc<CompiledLocal>>>,
    compiles: AtomicUsize,
    capacity: Option<usize>,
}

#[derive(Debug)]
struct CompiledLocal {
    local_amplitudes: Vec<Vec<f64>>,
    slice_duration: f64,
    fidelity: f64,
    iterations: usize,
}

impl CompilationCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// A cache that is cleared whenever it would grow past `capacity`.
    pub fn with_capacity_limit(capacity: usize) -> Self {
        Self {
            capacity: Some(capacity.max(1)),
            ..Self::default()
        }
    }

    /// Number of GRAPE runs performed so far.
    pub fn compile_count(&self) -> usize {
        self.compiles.load(Ordering::Relaxed)
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get_or_compile(
        &self,
        gate: &GateSpec,
        proc: &Processor,
        gene: Gene,
        seed: u64,
    ) -> Result<CompiledGate> {
        let (name, relative_qubits, unitary_hash) = gate.cache_identity();
        let key = CacheKey {
            name,
            relative_qubits,
            unitary_hash,
            evo_time_bits: gene.evo_time.to_bits(),
            num_tslots: gene.num_tslots,
            seed,
        };
        let (first, len) = gate.span();
        let hit = self.entries.read().expect("cache lock").get(&key).cloned();
        if let Some(c) = hit {
            if proc.drift().max_abs() == 0.0 {
                let (_, control_index) = proc.restrict(first, len)?;
                return Ok(CompiledGate {
                    gate_name: gate.name.clone(),
                    span: (first, len),
                    control_index,
                    local_amplitudes: c.local_amplitudes.clone(),
                    slice_duration: c.slice_duration,
                    fidelity: c.fidelity,
                    iterations: c.iterations,
                });
            }
        }
        let compiled = grape_compile(gate, proc, gene.evo_time, gene.num_tslots as usize, seed)?;
        self.compiles.fetch_add(1, Ordering::Relaxed);
        if proc.drift().max_abs() == 0.0 {
            let mut map = self.entries.write().expect("cache lock");
            if self.capacity.is_some_and(|c| map.len() >= c) {
                map.clear();
            }
            map.insert(
                key,
                Arc::new(CompiledLocal {
                    local_amplitudes: compiled.local_amplitudes.clone(),
                    slice_duration: compiled.slice_duration,
                    fidelity: compiled.fidelity,
                    iterations: compiled.iterations,
                }),
            );
        }
        Ok(compiled)
    }
}

/// Concatenates the compiled pulses of `circuit` in order, one gene per gate.
pub fn schedule_for_circuit(
    circuit: &[GateSpec],
    proc: &Processor,
    genes: &[Gene],
    seed: u64,
    cache: &CompilationCache,
) -> Result<PulseSchedule> {
    if genes.len() != circuit.len() {
        return Err(Error::arg(format!(
            "genome has {} genes for a {}-gate circuit",
            genes.len(),
            circuit.len()
        )));
    }
    let mut schedule = PulseSchedule::new(proc.n_controls());
    for (index, (gate, gene)) in circuit.iter().zip(genes).enumerate() {
        if gene.num_tslots == 0 || !(gene.evo_time > 0.0) {
            return Err(Error::arg(format!("gene {index} is not a valid pulse: {gene:?}")));
        }
        let compiled = cache.get_or_compile(gate, proc, *gene, seed)?;
        schedule.append(&compiled.schedule(proc.n_controls(), index))?;
    }
    Ok(schedule)
}

/// Ideal (gate-level) unitary of a whole gate list.
pub fn circuit_unitary(circuit: &[GateSpec], n_qubits: usize) -> Result<ComplexMatrix> {
    let mut u = ComplexMatrix::identity(1 << n_qubits);
    for g in circuit {
        u = &g.full_unitary(n_qubits)? * &u;
    }
    Ok(u)
}
