use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{ChoiState, KrausChannel, PTMatrix};
use crate::error::{Error, Result};
use crate::pauli::{
    check_qubits, pauli_coefficients, pauli_synthesize, transpose_sign, DenseOperator,
    PauliString,
};

/// `(id ⊗ N)(|Ω⟩⟨Ω|)` with `|Ω⟩ = Σ|ii⟩/√d`.
pub fn kraus_to_choi(ch: &KrausChannel) -> Result<ChoiState> {
    let d = 1usize << ch.qubits();
    let dd = d * d;
    let scale = 1.0 / (d as f64).sqrt();
    let mut acc = DMatrix::<Complex64>::zeros(dd, dd);
    for k in ch.ops() {
        // (I ⊗ K)|Ω⟩ has amplitude K[j][i]/√d at |i⟩_in|j⟩_out
        let v = nalgebra::DVector::from_fn(dd, |idx, _| k.get(idx % d, idx / d) * scale);
        acc += &v * v.adjoint();
    }
    ChoiState::from_matrix_unchecked(DenseOperator::new(acc)?)
}

/// `N(X) = 2ⁿ tr_in[(Xᵀ ⊗ I) Choi]`.
pub fn choi_apply(choi: &ChoiState, x: &DenseOperator) -> Result<DenseOperator> {
    let n = choi.qubits();
    let d = 1usize << n;
    if x.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: x.dim(),
        });
    }
    let c = choi.matrix();
    let mut out = DenseOperator::zeros(n)?;
    for a in 0..d {
        for b in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..d {
                for j in 0..d {
                    acc += x.get(j, i) * c.get(j * d + a, i * d + b);
                }
            }
            out.set(a, b, acc * d as f64);
        }
    }
    Ok(out)
}

/// `R[A][B] = s(B) · tr[(σ_B ⊗ σ_A) Choi]` via one Pauli transform of the Choi matrix.
pub fn choi_to_ptm(choi: &ChoiState) -> PTMatrix {
    let n = choi.qubits();
    let d2 = 1usize << (2 * n);
    let coeffs = pauli_coefficients(choi.matrix());
    let signs: Vec<f64> = (0..d2)
        .map(|b| transpose_sign(&PauliString::from_index(b, n)))
        .collect();
    let scale = d2 as f64;
    let data = DMatrix::from_fn(d2, d2, |a, b| signs[b] * scale * coeffs[b * d2 + a].re);
    PTMatrix { n, data }
}

/// Inverse of [`choi_to_ptm`]; takes any full PTM, no validity checks.
pub fn ptm_to_choi(ptm: &PTMatrix) -> Result<ChoiState> {
    let n = ptm.qubits();
    let d2 = 1usize << (2 * n);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); d2 * d2];
    for b in 0..d2 {
        let s = transpose_sign(&PauliString::from_index(b, n));
        for a in 0..d2 {
            coeffs[b * d2 + a] = Complex64::new(s * ptm.at(a, b) / d2 as f64, 0.0);
        }
    }
    ChoiState::from_matrix_unchecked(pauli_synthesize(&coeffs, 2 * n)?)
}

/// Brute-force PTM straight from the definition `tr[σ_A N(σ_B)] / 2ⁿ`.
pub fn exact_ptm(ch: &KrausChannel) -> Result<PTMatrix> {
    let n = ch.qubits();
    if n > 4 {
        return Err(Error::DimensionGuard { qubits: n, max: 4 });
    }
    check_qubits(2 * n)?;
    let d = 1usize << n;
    let paulis: Vec<PauliString> = PauliString::all(n).collect();
    let mut out = PTMatrix::zeros(n)?;
    for (b, pb) in paulis.iter().enumerate() {
        let image = ch.apply(&DenseOperator::from_pauli(pb)?)?;
        for (a, pa) in paulis.iter().enumerate() {
            // σ_A has one entry per row
            let mut tr = Complex64::new(0.0, 0.0);
            for r in 0..d {
                let (c, v) = pa.row_entry(r);
                tr += v * image.get(c, r);
            }
            out.set(a, b, tr.re / d as f64);
        }
    }
    Ok(out)
}

/// Kraus operators from the eigendecomposition of the Choi matrix.
pub fn choi_to_kraus(choi: &ChoiState) -> Result<KrausChannel> {
    let n = choi.qubits();
    let d = 1usize << n;
    let (vals, vecs) = choi.matrix().eigh()?;
    let cutoff = 1e-12;
    let mut ops = Vec::new();
    for (k, &lam) in vals.iter().enumerate().rev() {
        if lam <= cutoff {
            continue;
        }
        let s = (lam * d as f64).sqrt();
        let m = DMatrix::from_fn(d, d, |j, i| vecs[(i * d + j, k)] * s);
        ops.push(DenseOperator::new(m)?);
    }
    KrausChannel::new(ops)
}
