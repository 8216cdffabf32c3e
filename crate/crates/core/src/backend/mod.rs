//! Emulated quantum processor: state preparation, Pauli expectation values
//! (exact or shot-sampled), and dense reference evolution.

mod dense;
mod estimator;
pub mod gates;
mod state;

pub use dense::{dense_matrix, exact_evolve, DenseEvolver, DEFAULT_DENSE_LIMIT};
pub use estimator::{expectation, sampled_expectation, EstimatorConfig, EstimatorMode, DEFAULT_SHOTS};
pub use state::{apply_hamiltonian, DensityMatrix, StateVector, NORM_TOLERANCE};
