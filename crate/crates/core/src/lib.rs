//! Classical-quantum fast-forwarding of Pauli-string Hamiltonians.
//!
//! A reference state `|φ⟩` is expanded over Krylov-like ansatz states
//! `P_i|φ⟩`, the overlap matrices `D` and `E` are measured on a backend, and
//! the generalized eigenproblem `D v = λ E v` is used to propagate the
//! coefficients classically to any time.

pub mod backend;
pub mod cli;
pub mod error;
pub mod evolve;
pub mod hamiltonian;
pub mod linalg;
pub mod moments;
pub mod overlaps;
pub mod pauli;
pub mod perturb;
pub mod speceig;
pub mod trotter;

pub use error::{Error, Result};
