//! Pulse-level error mitigation for small quantum circuits.
//!
//! Circuits are compiled gate by gate into piecewise-constant control
//! schedules on a spin-chain processor, evolved under a Lindblad master
//! equation, and scored by Uhlmann fidelity against the ideal output. An
//! adaptive genetic algorithm searches the per-gate `(evo_time, num_tslots)`
//! pulse parameters for the schedule that best survives the noise.

pub mod circuits;
pub mod error;
pub mod evolve;
pub mod ga;
pub mod harness;
pub mod noise;
pub mod pulse;
pub mod qmath;

pub use error::{Error, Result};
