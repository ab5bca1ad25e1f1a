//! Simulation toolkit for learning Pauli transfer matrices and Hamiltonians of
//! small quantum channels, with exact oracles for checking every estimator.

pub mod error;
pub mod hamiltonian;
pub mod learner;
pub mod channel;
pub mod pauli;
pub mod predict;
pub mod separation;
pub mod sim;

pub use error::{Error, Result};
