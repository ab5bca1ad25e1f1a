//! Kraus, Choi and Pauli-transfer-matrix representations of `n`-qubit channels.
//!
//! Choi matrices act on `in ⊗ out` (input qubits first) and are normalized to
//! unit trace, i.e. they are the state `(id ⊗ N)(|Ω⟩⟨Ω|)`.

mod build;
mod convert;
mod io;
mod validate;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{check_qubits, DenseOperator, PauliString};

pub use build::{
    depolarizing, identity_channel, make_pauli_channel, make_sparse_choi_channel,
    pauli_channel_eigenvalues, random_channel, unitary_channel,
};
pub use convert::{choi_apply, choi_to_kraus, choi_to_ptm, exact_ptm, kraus_to_choi, ptm_to_choi};
pub use io::ChannelJson;
pub use validate::{validate, validate_choi_matrix, ValidationReport};

/// Default tolerance for trace-preservation, marginal and PSD checks.
pub const CHANNEL_TOL: f64 = 1e-9;

/// Entries of a PTM at or below this magnitude count as zero for sparsity.
pub const PTM_ZERO_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    n: usize,
    ops: Vec<DenseOperator>,
}

impl KrausChannel {
    /// Checks dimensions and `Σ K†K = I` within [`CHANNEL_TOL`].
    pub fn new(ops: Vec<DenseOperator>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidChannel("empty Kraus list".into()))?;
        let n = first.qubits();
        check_qubits(2 * n)?;
        if let Some(bad) = ops.iter().find(|k| k.qubits() != n) {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                found: bad.dim(),
            });
        }
        let ch = Self { n, ops };
        let dev = ch.completeness_deviation();
        if dev > CHANNEL_TOL {
            return Err(Error::InvalidChannel(format!(
                "Kraus completeness violated by {dev:e}"
            )));
        }
        Ok(ch)
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn ops(&self) -> &[DenseOperator] {
        &self.ops
    }

    /// `max |Σ K†K − I|` entrywise.
    pub fn completeness_deviation(&self) -> f64 {
        let d = 1 << self.n;
        let mut acc = DMatrix::<Complex64>::zeros(d, d);
        for k in &self.ops {
            acc += k.matrix().adjoint() * k.matrix();
        }
        acc -= DMatrix::identity(d, d);
        acc.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `Σ K X K†`.
    pub fn apply(&self, x: &DenseOperator) -> Result<DenseOperator> {
        if x.qubits() != self.n {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.n,
                found: x.dim(),
            });
        }
        let d = 1 << self.n;
        let mut acc = DMatrix::<Complex64>::zeros(d, d);
        for k in &self.ops {
            acc += k.matrix() * x.matrix() * k.matrix().adjoint();
        }
        DenseOperator::new(acc)
    }
}

/// A normalized Choi matrix on `2n` qubits, ordered `(in, out)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiState {
    n: usize,
    matrix: DenseOperator,
}

impl ChoiState {
    /// Validates Hermiticity, unit trace, PSD and the maximally mixed input marginal.
    pub fn new(matrix: DenseOperator) -> Result<Self> {
        let report = validate_choi_matrix(&matrix)?;
        if !report.hermitian {
            return Err(Error::InvalidChannel("Choi matrix is not Hermitian".into()));
        }
        if !report.cp {
            return Err(Error::InvalidChannel(format!(
                "Choi matrix not PSD (min eigenvalue {:e})",
                report.min_eigenvalue
            )));
        }
        if !report.tp {
            return Err(Error::InvalidChannel(format!(
                "input marginal deviates from I/2^n by {:e}",
                report.tp_deviation
            )));
        }
        Self::from_matrix_unchecked(matrix)
    }

    /// Only checks that the dimension is `4ⁿ`.
    pub fn from_matrix_unchecked(matrix: DenseOperator) -> Result<Self> {
        if !matrix.qubits().is_multiple_of(2) {
            return Err(Error::InvalidChannel(format!(
                "Choi matrix on {} qubits is not square-bipartite",
                matrix.qubits()
            )));
        }
        Ok(Self {
            n: matrix.qubits() / 2,
            matrix,
        })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DenseOperator {
        &self.matrix
    }

    pub fn into_matrix(self) -> DenseOperator {
        self.matrix
    }
}

/// Pauli transfer matrix, `R[A][B] = tr[σ_A N(σ_B)] / 2ⁿ`, rows indexed by output string.
#[derive(Clone, Debug, PartialEq)]
pub struct PTMatrix {
    n: usize,
    data: DMatrix<f64>,
}

impl PTMatrix {
    pub fn zeros(n: usize) -> Result<Self> {
        check_qubits(2 * n)?;
        let d = 1 << (2 * n);
        Ok(Self {
            n,
            data: DMatrix::zeros(d, d),
        })
    }

    pub fn from_matrix(n: usize, data: DMatrix<f64>) -> Result<Self> {
        check_qubits(2 * n)?;
        let d = 1 << (2 * n);
        if data.nrows() != d || data.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: data.nrows().max(data.ncols()),
            });
        }
        Ok(Self { n, data })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn get(&self, a: &PauliString, b: &PauliString) -> f64 {
        self.data[(a.index(), b.index())]
    }

    pub fn at(&self, a: usize, b: usize) -> f64 {
        self.data[(a, b)]
    }

    pub fn set(&mut self, a: usize, b: usize, v: f64) {
        self.data[(a, b)] = v;
    }

    /// Entries with magnitude above `tol`, in row-major order.
    pub fn nonzeros(&self, tol: f64) -> Vec<(PauliString, PauliString, f64)> {
        let d = self.dim();
        let mut out = Vec::new();
        for a in 0..d {
            for b in 0..d {
                let v = self.data[(a, b)];
                if v.abs() > tol {
                    out.push((
                        PauliString::from_index(a, self.n),
                        PauliString::from_index(b, self.n),
                        v,
                    ));
                }
            }
        }
        out
    }

    pub fn sparsity(&self, tol: f64) -> usize {
        self.data.iter().filter(|v| v.abs() > tol).count()
    }

    pub fn max_abs_diff(&self, other: &PTMatrix) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        (&self.data - &other.data).amax()
    }

    /// CSV with Pauli-string headers on both axes.
    pub fn to_csv(&self) -> String {
        let labels: Vec<String> = PauliString::all(self.n).map(|p| p.to_string()).collect();
        let mut out = String::from("A\\B");
        for l in &labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (a, l) in labels.iter().enumerate() {
            out.push_str(l);
            for b in 0..self.dim() {
                out.push(',');
                out.push_str(&self.data[(a, b)].to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// A channel in any of the three supported forms.
#[derive(Clone, Debug, PartialEq)]
pub enum ChannelRep {
    Kraus(KrausChannel),
    Choi(ChoiState),
    Ptm(PTMatrix),
}

impl ChannelRep {
    pub fn qubits(&self) -> usize {
        match self {
            ChannelRep::Kraus(k) => k.qubits(),
            ChannelRep::Choi(c) => c.qubits(),
            ChannelRep::Ptm(p) => p.qubits(),
        }
    }

    pub fn to_choi(&self) -> Result<ChoiState> {
        match self {
            ChannelRep::Kraus(k) => kraus_to_choi(k),
            ChannelRep::Choi(c) => Ok(c.clone()),
            ChannelRep::Ptm(p) => ptm_to_choi(p),
        }
    }

    pub fn to_ptm(&self) -> Result<PTMatrix> {
        match self {
            ChannelRep::Ptm(p) => Ok(p.clone()),
            other => Ok(choi_to_ptm(&other.to_choi()?)),
        }
    }

    pub fn to_kraus(&self) -> Result<KrausChannel> {
        match self {
            ChannelRep::Kraus(k) => Ok(k.clone()),
            other => choi_to_kraus(&other.to_choi()?),
        }
    }

    /// `N(X)`.
    pub fn apply(&self, x: &DenseOperator) -> Result<DenseOperator> {
        match self {
            ChannelRep::Kraus(k) => k.apply(x),
            other => choi_apply(&other.to_choi()?, x),
        }
    }
}
