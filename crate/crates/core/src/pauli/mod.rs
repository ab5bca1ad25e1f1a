//! Pauli strings, their algebra, and conversions between dense matrices and
//! Pauli-basis expansions.

mod dense;
mod expansion;
mod string;

pub use dense::{check_qubits, DenseOperator, HERMITIAN_TOL, MAX_QUBITS};
pub use expansion::{
    pauli_coefficients, pauli_synthesize, tensor_transform, to_dense, to_expansion, Convention,
    SparseOperatorExpansion, COEFF_ZERO_TOL,
};
pub use string::{commutes, pauli_product, transpose_sign, PauliString, Phase};
