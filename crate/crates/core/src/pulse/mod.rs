//! Spin-chain processor model and per-gate pulse compilation.

mod compile;
mod grape;
mod processor;
mod schedule;

pub use compile::{
    circuit_unitary, grape_compile, grape_compile_with, schedule_for_circuit, CompilationCache,
    CompiledGate, GateSpec,
};
pub use grape::{gate_fidelity, optimize_unitary, GrapeOptions, GrapeResult};
pub use processor::{build_spin_chain_processor, ControlTerm, Processor, MAX_QUBITS};
pub use schedule::{Gene, PulseSchedule, Slice};
