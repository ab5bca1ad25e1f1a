#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ptmlab_core::pauli::PauliString;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Single-qubit Pauli from the textbook matrices.
pub fn pauli_2x2(s: u8) -> DMatrix<Complex64> {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    match s {
        0 => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        1 => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        2 => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        _ => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

/// Dense Pauli string by repeated Kronecker products, qubit 1 leftmost.
pub fn kron_pauli(p: &PauliString) -> DMatrix<Complex64> {
    p.symbols()
        .iter()
        .fold(DMatrix::from_element(1, 1, c(1.0, 0.0)), |acc, &s| acc.kronecker(&pauli_2x2(s)))
}

pub fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn pauli_string(len: usize) -> impl Strategy<Value = PauliString> {
    proptest::collection::vec(0u8..4, len).prop_map(|w| PauliString::new(w).unwrap())
}

pub fn nontrivial_string(len: usize) -> impl Strategy<Value = PauliString> {
    pauli_string(len).prop_filter("identity", |p| !p.is_identity())
}
