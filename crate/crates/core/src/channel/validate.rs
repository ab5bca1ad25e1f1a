use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{choi_to_ptm, ChannelRep, ChoiState, CHANNEL_TOL, PTM_ZERO_TOL};
use crate::error::Result;
use crate::pauli::DenseOperator;

/// Outcome of the channel checks. Never an error for merely invalid channels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub hermitian: bool,
    pub cp: bool,
    pub tp: bool,
    pub unital: bool,
    pub ptm_sparsity: usize,
    pub min_eigenvalue: f64,
    pub trace: f64,
    pub tp_deviation: f64,
    pub unital_deviation: f64,
}

/// Checks on a candidate Choi matrix on `2n` qubits with the `(in, out)` order.
pub fn validate_choi_matrix(m: &DenseOperator) -> Result<ValidationReport> {
    let choi = ChoiState::from_matrix_unchecked(m.clone())?;
    let n = choi.qubits();
    let d = (1u64 << n) as f64;
    let hermitian_dev = m.hermitian_deviation();
    let hermitian = hermitian_dev <= CHANNEL_TOL;
    let min_eigenvalue = if hermitian {
        m.min_eigenvalue()?
    } else {
        f64::NEG_INFINITY
    };
    let target = DenseOperator::identity(n)?.scale(Complex64::new(1.0 / d, 0.0));
    let tp_deviation = m.trace_back(n)?.max_abs_diff(&target);
    let unital_deviation = m.trace_front(n)?.max_abs_diff(&target);
    let ptm_sparsity = if hermitian {
        choi_to_ptm(&choi).sparsity(PTM_ZERO_TOL)
    } else {
        0
    };
    Ok(ValidationReport {
        hermitian,
        cp: hermitian && min_eigenvalue >= -CHANNEL_TOL,
        tp: tp_deviation <= CHANNEL_TOL,
        unital: unital_deviation <= CHANNEL_TOL,
        ptm_sparsity,
        min_eigenvalue,
        trace: m.trace().re,
        tp_deviation,
        unital_deviation,
    })
}

pub fn validate(ch: &ChannelRep) -> Result<ValidationReport> {
    validate_choi_matrix(ch.to_choi()?.matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{identity_channel, make_sparse_choi_channel};

    #[test]
    fn identity_passes_everything() {
        let r = validate(&ChannelRep::Kraus(identity_channel(2).unwrap())).unwrap();
        assert!(r.cp && r.tp && r.unital && r.hermitian);
        assert_eq!(r.ptm_sparsity, 16);
    }

    #[test]
    fn sparse_choi_validity() {
        let r = validate(&make_sparse_choi_channel(&"XZ".parse().unwrap()).unwrap()).unwrap();
        assert!(r.cp && r.tp && r.unital);
        assert_eq!(r.ptm_sparsity, 2);
        let r = validate(&make_sparse_choi_channel(&"IZ".parse().unwrap()).unwrap()).unwrap();
        assert!(r.cp && r.tp && !r.unital);
    }

    #[test]
    fn non_psd_flagged() {
        let mut m = DenseOperator::identity(2)
            .unwrap()
            .scale(Complex64::new(0.25, 0.0));
        m.set(0, 0, Complex64::new(-0.25, 0.0));
        m.set(3, 3, Complex64::new(0.75, 0.0));
        let r = validate_choi_matrix(&m).unwrap();
        assert!(!r.cp);
        assert!(r.min_eigenvalue < 0.0);
    }
}
