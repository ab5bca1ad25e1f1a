use num_complex::Complex64;

use crate::channel::{ChannelRep, KrausChannel, CHANNEL_TOL};
use crate::error::{Error, Result};
use crate::pauli::{
    pauli_coefficients, to_dense, DenseOperator, PauliString, SparseOperatorExpansion,
};

/// Imaginary part of an expectation value tolerated before it is reported.
pub const EXPECTATION_RESIDUE_TOL: f64 = 1e-10;

/// A validated density matrix on `m` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: DenseOperator,
}

impl DensityMatrix {
    /// Checks Hermiticity, unit trace and PSD within [`CHANNEL_TOL`].
    pub fn new(op: DenseOperator) -> Result<Self> {
        let dev = op.hermitian_deviation();
        if dev > CHANNEL_TOL {
            return Err(Error::InvalidState(format!("not Hermitian ({dev:e})")));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > CHANNEL_TOL || tr.im.abs() > CHANNEL_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = op.min_eigenvalue()?;
        if min < -CHANNEL_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { op })
    }

    pub fn maximally_mixed(m: usize) -> Result<Self> {
        let d = (1u64 << m) as f64;
        Ok(Self {
            op: DenseOperator::identity(m)?.scale(Complex64::new(1.0 / d, 0.0)),
        })
    }

    /// `|ψ⟩⟨ψ|` after normalizing `ψ`.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        Self::new(DenseOperator::projector(&v)?)
    }

    pub fn from_expansion(e: &SparseOperatorExpansion) -> Result<Self> {
        Self::new(to_dense(e)?)
    }

    pub fn qubits(&self) -> usize {
        self.op.qubits()
    }

    pub fn operator(&self) -> &DenseOperator {
        &self.op
    }

    /// `tr[P ρ]` for every Pauli string, in index order.
    pub fn pauli_expectations(&self) -> Vec<f64> {
        let d = self.op.dim() as f64;
        pauli_coefficients(&self.op)
            .into_iter()
            .map(|c| c.re * d)
            .collect()
    }

    pub fn pauli_expectation(&self, p: &PauliString) -> Result<f64> {
        if p.len() != self.qubits() {
            return Err(Error::LengthMismatch {
                left: self.qubits(),
                right: p.len(),
            });
        }
        let mut tr = Complex64::new(0.0, 0.0);
        for r in 0..self.op.dim() {
            let (c, v) = p.row_entry(r);
            tr += v * self.op.get(c, r);
        }
        Ok(tr.re)
    }

    pub fn purity(&self) -> f64 {
        self.op.frobenius_sq()
    }

    /// Von Neumann entropy in bits.
    pub fn entropy(&self) -> Result<f64> {
        let (vals, _) = self.op.eigh()?;
        Ok(vals
            .iter()
            .filter(|&&l| l > 1e-15)
            .map(|&l| -l * l.log2())
            .sum())
    }
}

/// `tr[O ρ]`, failing if the imaginary part exceeds [`EXPECTATION_RESIDUE_TOL`].
pub fn expectation(rho: &DensityMatrix, o: &DenseOperator) -> Result<f64> {
    let v = rho.operator().trace_product(o)?;
    if v.im.abs() > EXPECTATION_RESIDUE_TOL {
        return Err(Error::InvalidArgument(format!(
            "expectation has imaginary part {:e}; observable not Hermitian?",
            v.im
        )));
    }
    Ok(v.re)
}

/// The `2n`-qubit Choi state as a density matrix.
pub fn choi_state(ch: &ChannelRep) -> Result<DensityMatrix> {
    DensityMatrix::new(ch.to_choi()?.into_matrix())
}

/// Single unitary `exp(−itH)`.
pub fn evolve_unitary(h: &SparseOperatorExpansion, t: f64) -> Result<KrausChannel> {
    let n = h.qubits();
    if n > 4 {
        return Err(Error::DimensionGuard { qubits: n, max: 4 });
    }
    let u = to_dense(h)?.unitary_evolution(t)?;
    let dev = u
        .adjoint()
        .mul(&u)?
        .max_abs_diff(&DenseOperator::identity(n)?);
    if dev > CHANNEL_TOL {
        return Err(Error::InvalidChannel(format!("evolution not unitary ({dev:e})")));
    }
    KrausChannel::new(vec![u])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Convention;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn expectation_examples() {
        let z = DenseOperator::from_pauli(&"Z".parse().unwrap()).unwrap();
        let mm = DensityMatrix::maximally_mixed(1).unwrap();
        assert_eq!(expectation(&mm, &z).unwrap(), 0.0);
        let zero = DensityMatrix::pure(&[c(1.0), c(0.0)]).unwrap();
        assert_eq!(expectation(&zero, &z).unwrap(), 1.0);
        let y = DenseOperator::from_pauli(&"Y".parse().unwrap()).unwrap();
        let bad = y.mul(&z).unwrap();
        let plus = DensityMatrix::pure(&[c(1.0), c(1.0)]).unwrap();
        assert!(expectation(&plus, &bad).is_err());
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let h = SparseOperatorExpansion::new(2, Convention::Unnormalized);
        let u = evolve_unitary(&h, 0.7).unwrap();
        assert!(u.ops()[0].max_abs_diff(&DenseOperator::identity(2).unwrap()) < 1e-14);
    }

    #[test]
    fn half_pi_x_rotation() {
        let h = SparseOperatorExpansion::from_entries(
            1,
            Convention::Unnormalized,
            [("X".parse().unwrap(), std::f64::consts::FRAC_PI_2)],
        )
        .unwrap();
        let u = evolve_unitary(&h, 1.0).unwrap();
        let want = DenseOperator::from_pauli(&"X".parse().unwrap())
            .unwrap()
            .scale(Complex64::new(0.0, -1.0));
        assert!(u.ops()[0].max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn invalid_states_rejected() {
        let mut m = DenseOperator::identity(1).unwrap();
        assert!(DensityMatrix::new(m.clone()).is_err());
        m.set(0, 0, c(1.5));
        m.set(1, 1, c(-0.5));
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn entropy_of_maximally_mixed() {
        let mm = DensityMatrix::maximally_mixed(3).unwrap();
        assert!((mm.entropy().unwrap() - 3.0).abs() < 1e-12);
    }
}
