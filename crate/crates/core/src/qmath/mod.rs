//! Dense complex linear algebra and quantum-state primitives.

mod expm;
mod matrix;
mod state;

pub use expm::{exponential_action, matrix_exponential, unitary_propagator};
pub use matrix::{lift, ops, qubit_count, tensor_product, ComplexMatrix, C64, I, ONE, ZERO};
pub use state::{
    state_fidelity, trace_distance, validate_density_matrix, DensityMatrix, PureState, DENSITY_TOLERANCE,
    PURE_NORM_TOLERANCE,
};
