use std::collections::BTreeMap;
use std::ops::{Add, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dense::{check_qubits, DenseOperator, HERMITIAN_TOL};
use super::string::PauliString;
use crate::error::{Error, Result};

/// Coefficients with magnitude at or below this are treated as zero and not stored.
pub const COEFF_ZERO_TOL: f64 = 1e-13;

/// Normalization of the coefficients in a [`SparseOperatorExpansion`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Convention {
    /// `M = Σ c(A) σ_A`
    Unnormalized,
    /// `M = Σ c(A) σ_A / √(2ⁿ)`
    Onb,
}

/// Applies a 4×4 kernel independently on every base-4 digit of `data`.
///
/// `data` has length `4^m`, indexed big-endian with one digit per qubit.
/// Cost is `O(m · 4^m)`.
pub fn tensor_transform<T>(data: &mut [T], m: usize, kernel: &[[T; 4]; 4])
where
    T: Copy + Default + Add<Output = T> + Mul<Output = T>,
{
    debug_assert_eq!(data.len(), 1 << (2 * m));
    for k in 0..m {
        let stride = 1usize << (2 * (m - 1 - k));
        let block = stride * 4;
        for base in (0..data.len()).step_by(block) {
            for off in 0..stride {
                let i0 = base + off;
                let v = [
                    data[i0],
                    data[i0 + stride],
                    data[i0 + 2 * stride],
                    data[i0 + 3 * stride],
                ];
                for (a, row) in kernel.iter().enumerate() {
                    let mut acc = T::default();
                    for (d, &kv) in row.iter().enumerate() {
                        acc = acc + kv * v[d];
                    }
                    data[i0 + a * stride] = acc;
                }
            }
        }
    }
}

/// Position of matrix entry `(r, c)` in the per-qubit digit layout
/// (digit `2·r_k + c_k` for qubit `k`).
fn interleave(r: usize, c: usize, m: usize) -> usize {
    let mut out = 0usize;
    for k in 0..m {
        let bit = m - 1 - k;
        let d = (((r >> bit) & 1) << 1) | ((c >> bit) & 1);
        out = (out << 2) | d;
    }
    out
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn forward_kernel() -> [[Complex64; 4]; 4] {
    let z = c(0.0, 0.0);
    let h = c(0.5, 0.0);
    [
        [h, z, z, h],
        [z, h, h, z],
        [z, c(0.0, 0.5), c(0.0, -0.5), z],
        [h, z, z, -h],
    ]
}

fn inverse_kernel() -> [[Complex64; 4]; 4] {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    [
        [o, z, z, o],
        [z, o, c(0.0, -1.0), z],
        [z, o, c(0.0, 1.0), z],
        [o, z, z, -o],
    ]
}

/// Unnormalized Pauli coefficients `tr[σ_A M] / 2^m` for every `A`, in index order.
pub fn pauli_coefficients(m: &DenseOperator) -> Vec<Complex64> {
    let q = m.qubits();
    let d = m.dim();
    let mut data = vec![Complex64::default(); d * d];
    for r in 0..d {
        for col in 0..d {
            data[interleave(r, col, q)] = m.get(r, col);
        }
    }
    tensor_transform(&mut data, q, &forward_kernel());
    data
}

/// Inverse of [`pauli_coefficients`]: builds `Σ c(A) σ_A`.
pub fn pauli_synthesize(coeffs: &[Complex64], qubits: usize) -> Result<DenseOperator> {
    check_qubits(qubits)?;
    let len = 1usize << (2 * qubits);
    if coeffs.len() != len {
        return Err(Error::DimensionMismatch {
            expected: len,
            found: coeffs.len(),
        });
    }
    let mut data = coeffs.to_vec();
    tensor_transform(&mut data, qubits, &inverse_kernel());
    let mut out = DenseOperator::zeros(qubits)?;
    let d = out.dim();
    for r in 0..d {
        for col in 0..d {
            out.set(r, col, data[interleave(r, col, qubits)]);
        }
    }
    Ok(out)
}

/// A Hermitian operator stored by its nonzero real Pauli coefficients.
///
/// Serialized as `{n, convention, terms: [["XZI", 0.25], …]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExpansionJson", into = "ExpansionJson")]
pub struct SparseOperatorExpansion {
    n: usize,
    convention: Convention,
    entries: BTreeMap<PauliString, f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpansionJson {
    n: usize,
    convention: Convention,
    terms: Vec<(PauliString, f64)>,
}

impl TryFrom<ExpansionJson> for SparseOperatorExpansion {
    type Error = Error;
    fn try_from(j: ExpansionJson) -> Result<Self> {
        Self::from_entries(j.n, j.convention, j.terms)
    }
}

impl From<SparseOperatorExpansion> for ExpansionJson {
    fn from(e: SparseOperatorExpansion) -> Self {
        Self {
            n: e.n,
            convention: e.convention,
            terms: e.entries.into_iter().collect(),
        }
    }
}

impl SparseOperatorExpansion {
    pub fn new(n: usize, convention: Convention) -> Self {
        Self {
            n,
            convention,
            entries: BTreeMap::new(),
        }
    }

    pub fn from_entries<I>(n: usize, convention: Convention, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliString, f64)>,
    {
        let mut out = Self::new(n, convention);
        for (p, v) in entries {
            out.insert(p, v)?;
        }
        Ok(out)
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// Adds `v` to the coefficient of `p`, dropping it if the result is negligible.
    pub fn insert(&mut self, p: PauliString, v: f64) -> Result<()> {
        if p.len() != self.n {
            return Err(Error::LengthMismatch {
                left: self.n,
                right: p.len(),
            });
        }
        let v = self.get(&p) + v;
        if v.abs() <= COEFF_ZERO_TOL {
            self.entries.remove(&p);
        } else {
            self.entries.insert(p, v);
        }
        Ok(())
    }

    pub fn get(&self, p: &PauliString) -> f64 {
        self.entries.get(p).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, &f64)> {
        self.entries.iter()
    }

    pub fn sparsity(&self) -> usize {
        self.entries.len()
    }

    /// Same operator expressed in the other convention.
    pub fn to_convention(&self, target: Convention) -> Self {
        let factor = match (self.convention, target) {
            (a, b) if a == b => 1.0,
            (Convention::Unnormalized, Convention::Onb) => (2f64).powi(self.n as i32).sqrt(),
            _ => 1.0 / (2f64).powi(self.n as i32).sqrt(),
        };
        Self {
            n: self.n,
            convention: target,
            entries: self
                .entries
                .iter()
                .map(|(k, v)| (k.clone(), v * factor))
                .collect(),
        }
    }

    /// Guards against silently mixing conventions.
    pub fn require(&self, convention: Convention) -> Result<&Self> {
        if self.convention != convention {
            return Err(Error::Convention(format!(
                "expected {convention:?} coefficients, found {:?}",
                self.convention
            )));
        }
        Ok(self)
    }

    /// Sum of absolute coefficients.
    pub fn l1_norm(&self) -> f64 {
        self.entries.values().map(|v| v.abs()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.entries.values().map(|v| v * v).sum::<f64>().sqrt()
    }
}

pub fn to_dense(expansion: &SparseOperatorExpansion) -> Result<DenseOperator> {
    let n = expansion.qubits();
    check_qubits(n)?;
    let unnorm = expansion.to_convention(Convention::Unnormalized);
    let mut out = DenseOperator::zeros(n)?;
    for (p, &v) in unnorm.iter() {
        for r in 0..out.dim() {
            let (col, val) = p.row_entry(r);
            let cur = out.get(r, col);
            out.set(r, col, cur + val * v);
        }
    }
    Ok(out)
}

pub fn to_expansion(m: &DenseOperator, convention: Convention) -> Result<SparseOperatorExpansion> {
    let scale = m
        .matrix()
        .iter()
        .map(|z| z.norm())
        .fold(1.0f64, f64::max);
    m.require_hermitian(HERMITIAN_TOL * scale)?;
    let n = m.qubits();
    let coeffs = pauli_coefficients(m);
    let mut out = SparseOperatorExpansion::new(n, Convention::Unnormalized);
    for (i, z) in coeffs.iter().enumerate() {
        if z.re.abs() > COEFF_ZERO_TOL {
            out.entries.insert(PauliString::from_index(i, n), z.re);
        }
    }
    Ok(out.to_convention(convention))
}
