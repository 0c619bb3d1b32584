//! Exact-diagonalization laboratory for quantum-annealing ramps on spin-½ chains.
//!
//! The crate builds the interpolated mixed-field Ising Hamiltonian, propagates
//! states and full evolution operators through forward and cyclic ramps, and
//! measures level statistics, entanglement entropies and operator-size
//! distributions along the way.

pub mod eigenstate_analysis;
pub mod error;
pub mod evolution;
pub mod linalg;
pub mod model;
pub mod pauli;
pub mod scrambling;
pub mod sparse;
pub mod spectral;
pub mod states;

pub use error::{Error, Result};
pub use linalg::DenseOperator;
