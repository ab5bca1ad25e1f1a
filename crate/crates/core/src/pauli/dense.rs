use nalgebra::DMatrix;
use num_complex::Complex64;

use super::string::PauliString;
use crate::error::{Error, Result};

/// Largest total qubit count any dense operation accepts (dimension 256).
pub const MAX_QUBITS: usize = 8;

/// Tolerance used when an operator is claimed to be Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

pub fn check_qubits(qubits: usize) -> Result<()> {
    if qubits > MAX_QUBITS {
        return Err(Error::DimensionGuard {
            qubits,
            max: MAX_QUBITS,
        });
    }
    Ok(())
}

/// A square complex matrix on `m` qubits in the computational basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    qubits: usize,
    matrix: DMatrix<Complex64>,
}

impl DenseOperator {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.ncols(),
            });
        }
        if !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "dimension {dim} is not a power of two"
            )));
        }
        let qubits = dim.trailing_zeros() as usize;
        check_qubits(qubits)?;
        Ok(Self { qubits, matrix })
    }

    pub fn zeros(qubits: usize) -> Result<Self> {
        check_qubits(qubits)?;
        let d = 1 << qubits;
        Ok(Self {
            qubits,
            matrix: DMatrix::zeros(d, d),
        })
    }

    pub fn identity(qubits: usize) -> Result<Self> {
        check_qubits(qubits)?;
        let d = 1 << qubits;
        Ok(Self {
            qubits,
            matrix: DMatrix::identity(d, d),
        })
    }

    /// Rank-one projector `|ψ⟩⟨ψ|` (the vector is used as given, not normalized).
    pub fn projector(psi: &[Complex64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        Self::new(&v * v.adjoint())
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let d = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(d, d, |r, c| rows[r][c]))
    }

    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim())
            .map(|r| (0..self.dim()).map(|c| self.matrix[(r, c)]).collect())
            .collect()
    }

    pub fn from_pauli(p: &PauliString) -> Result<Self> {
        let qubits = p.len();
        let mut out = Self::zeros(qubits)?;
        for r in 0..out.dim() {
            let (c, v) = p.row_entry(r);
            out.matrix[(r, c)] = v;
        }
        Ok(out)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.matrix[(r, c)]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.matrix[(r, c)] = v;
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.matrix[(r, c)] - self.matrix[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub fn require_hermitian(&self, tol: f64) -> Result<()> {
        let deviation = self.hermitian_deviation();
        if deviation > tol {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(())
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            qubits: self.qubits,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            qubits: self.qubits,
            matrix: self.matrix.transpose(),
        }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            qubits: self.qubits,
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            qubits: self.qubits,
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            qubits: self.qubits,
            matrix: &self.matrix - &other.matrix,
        })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            qubits: self.qubits,
            matrix: &self.matrix * s,
        }
    }

    /// `tr[self · other]` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<Complex64> {
        self.check_same(other)?;
        let d = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..d {
            for c in 0..d {
                acc += self.matrix[(r, c)] * other.matrix[(c, r)];
            }
        }
        Ok(acc)
    }

    /// `self ⊗ other` with `self` as the leading (most significant) factor.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        check_qubits(self.qubits + other.qubits)?;
        Ok(Self {
            qubits: self.qubits + other.qubits,
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    /// Traces out the leading `front` qubits.
    pub fn trace_front(&self, front: usize) -> Result<Self> {
        if front > self.qubits {
            return Err(Error::InvalidArgument(format!(
                "cannot trace {front} of {} qubits",
                self.qubits
            )));
        }
        let keep = self.qubits - front;
        let db = 1 << keep;
        let da = 1 << front;
        let mut out = Self::zeros(keep)?;
        for a in 0..da {
            for r in 0..db {
                for c in 0..db {
                    out.matrix[(r, c)] += self.matrix[(a * db + r, a * db + c)];
                }
            }
        }
        Ok(out)
    }

    /// Traces out the trailing `back` qubits.
    pub fn trace_back(&self, back: usize) -> Result<Self> {
        if back > self.qubits {
            return Err(Error::InvalidArgument(format!(
                "cannot trace {back} of {} qubits",
                self.qubits
            )));
        }
        let keep = self.qubits - back;
        let da = 1 << keep;
        let db = 1 << back;
        let mut out = Self::zeros(keep)?;
        for r in 0..da {
            for c in 0..da {
                let mut acc = Complex64::new(0.0, 0.0);
                for b in 0..db {
                    acc += self.matrix[(r * db + b, c * db + b)];
                }
                out.matrix[(r, c)] = acc;
            }
        }
        Ok(out)
    }

    /// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian operator.
    pub fn eigh(&self) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
        self.require_hermitian(1e-9)?;
        let sym = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = sym.symmetric_eigen();
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            eig.eigenvectors[(r, order[c])]
        });
        Ok((values, vectors))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigh()?.0[0])
    }

    /// `exp(-i t H)` for Hermitian `H = self`.
    pub fn unitary_evolution(&self, t: f64) -> Result<Self> {
        let (vals, vecs) = self.eigh()?;
        let phases = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            vals.len(),
            vals.iter().map(|&e| Complex64::from_polar(1.0, -e * t)),
        ));
        Ok(Self {
            qubits: self.qubits,
            matrix: &vecs * phases * vecs.adjoint(),
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        self.matrix
            .clone()
            .singular_values()
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }

    /// Squared Hilbert-Schmidt norm `tr[M† M]`.
    pub fn frobenius_sq(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pauli_y_matrix() {
        let y = DenseOperator::from_pauli(&"Y".parse().unwrap()).unwrap();
        assert_eq!(y.get(0, 1), c(0.0, -1.0));
        assert_eq!(y.get(1, 0), c(0.0, 1.0));
        assert_eq!(y.get(0, 0), c(0.0, 0.0));
    }

    #[test]
    fn kron_order_is_left_major() {
        let z = DenseOperator::from_pauli(&"Z".parse().unwrap()).unwrap();
        let i = DenseOperator::identity(1).unwrap();
        let zi = z.kron(&i).unwrap();
        let direct = DenseOperator::from_pauli(&"ZI".parse().unwrap()).unwrap();
        assert_eq!(zi, direct);
        assert_eq!(zi.get(2, 2), c(-1.0, 0.0));
    }

    #[test]
    fn partial_traces() {
        let z = DenseOperator::from_pauli(&"Z".parse().unwrap()).unwrap();
        let x = DenseOperator::from_pauli(&"X".parse().unwrap()).unwrap();
        let i = DenseOperator::identity(1).unwrap();
        let zi = z.kron(&i).unwrap();
        assert!(zi.trace_front(1).unwrap().max_abs_diff(&DenseOperator::zeros(1).unwrap()) < 1e-15);
        assert!(zi.trace_back(1).unwrap().max_abs_diff(&z.scale(c(2.0, 0.0))) < 1e-15);
        let ix = i.kron(&x).unwrap();
        assert!(ix.trace_front(1).unwrap().max_abs_diff(&x.scale(c(2.0, 0.0))) < 1e-15);
    }

    #[test]
    fn dimension_guard() {
        assert!(matches!(
            DenseOperator::identity(9),
            Err(Error::DimensionGuard { qubits: 9, max: 8 })
        ));
        assert!(DenseOperator::new(DMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn evolution_of_z_is_diagonal_phase() {
        let z = DenseOperator::from_pauli(&"Z".parse().unwrap()).unwrap();
        let u = z.unitary_evolution(0.3).unwrap();
        assert!((u.get(0, 0) - Complex64::from_polar(1.0, -0.3)).norm() < 1e-12);
        assert!((u.get(1, 1) - Complex64::from_polar(1.0, 0.3)).norm() < 1e-12);
    }
}
