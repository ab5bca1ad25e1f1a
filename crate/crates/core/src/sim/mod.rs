//! Exact density-matrix simulation: Bell-pair sampling, single-copy Pauli
//! measurements and Hamiltonian evolution, all driven by reproducible streams.

mod bell;
mod oracle;
mod rng;
mod state;

pub use bell::{
    bell_character, bell_character_sums, bell_distribution, bell_histogram, bell_sample,
    bell_sign, multinomial, pauli_outcome_sample, pauli_plus_count, sample_from_distribution,
    BellLabel, BellOutcomeRecord, BELL_SIGNS,
};
pub use oracle::ChoiOracle;
pub use rng::RngStream;
pub use state::{
    choi_state, evolve_unitary, expectation, DensityMatrix, EXPECTATION_RESIDUE_TOL,
};
