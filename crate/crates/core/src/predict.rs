//! Expectation-value prediction from (estimated) transfer matrices, error
//! bounds, and general Hermitian-ONB transfer matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelRep, PTMatrix};
use crate::error::{Error, Result};
use crate::learner::{PTMEstimate, SparsePTMReport};
use crate::pauli::{check_qubits, Convention, DenseOperator, PauliString, SparseOperatorExpansion};

/// Read access to PTM entries `(A, B)` by string index.
pub trait TransferEstimate {
    fn qubits(&self) -> usize;
    fn entry(&self, a: usize, b: usize) -> f64;
}

impl TransferEstimate for PTMatrix {
    fn qubits(&self) -> usize {
        PTMatrix::qubits(self)
    }
    fn entry(&self, a: usize, b: usize) -> f64 {
        self.at(a, b)
    }
}

impl TransferEstimate for PTMEstimate {
    fn qubits(&self) -> usize {
        self.ptm.qubits()
    }
    fn entry(&self, a: usize, b: usize) -> f64 {
        self.ptm.at(a, b)
    }
}

/// Entries missing from the report read as zero.
impl TransferEstimate for SparsePTMReport {
    fn qubits(&self) -> usize {
        self.n
    }
    fn entry(&self, a: usize, b: usize) -> f64 {
        self.entries
            .iter()
            .find(|(x, y, _)| x.index() == a && y.index() == b)
            .map(|e| e.2)
            .unwrap_or(0.0)
    }
}

/// `μ̂ = Σ_{A,B} α(B) β(A) r̂[A][B]` with `α, β` the ONB coefficients of `ρ` and `O`.
///
/// Only pairs where both coefficients are nonzero are visited.
pub fn predict_expectation(
    rep: &dyn TransferEstimate,
    rho: &SparseOperatorExpansion,
    o: &SparseOperatorExpansion,
) -> Result<f64> {
    let n = rep.qubits();
    for q in [rho.qubits(), o.qubits()] {
        if q != n {
            return Err(Error::LengthMismatch { left: n, right: q });
        }
    }
    let alpha = rho.to_convention(Convention::Onb);
    let trace = alpha.get(&PauliString::identity(n)) * (2f64).powi(n as i32).sqrt();
    if (trace - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState(format!("state has trace {trace}")));
    }
    let beta = o.to_convention(Convention::Onb);
    let mut mu = 0.0;
    for (b, ab) in alpha.iter() {
        for (a, ba) in beta.iter() {
            mu += ab * ba * rep.entry(a.index(), b.index());
        }
    }
    Ok(mu)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    /// `ε · B_ρ · B_O` from 1-norm bounds on the coefficient vectors.
    Onenorm,
    /// `ε · s_ρ · √s_O · ‖O‖₂ · max‖Q‖∞` for sparse state and observable.
    SparseObjects,
    /// `ε · s_N · ‖O‖₂ · max‖Q‖∞` for a channel with sparse transfer matrix.
    SparseChannel,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub b_rho: Option<f64>,
    pub b_o: Option<f64>,
    pub s_rho: Option<f64>,
    pub s_o: Option<f64>,
    pub o_norm2: Option<f64>,
    pub q_max: Option<f64>,
    pub s_n: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionBoundReport {
    pub bound: f64,
    pub mode: BoundMode,
    pub epsilon: f64,
    pub params: BoundParams,
}

pub fn prediction_error_bound(
    mode: BoundMode,
    epsilon: f64,
    params: &BoundParams,
) -> Result<PredictionBoundReport> {
    let need = |v: Option<f64>, name: &str| {
        v.ok_or_else(|| Error::InvalidArgument(format!("{mode:?} bound needs {name}")))
    };
    let bound = match mode {
        BoundMode::Onenorm => epsilon * need(params.b_rho, "b_rho")? * need(params.b_o, "b_o")?,
        BoundMode::SparseObjects => {
            epsilon
                * need(params.s_rho, "s_rho")?
                * need(params.s_o, "s_o")?.sqrt()
                * need(params.o_norm2, "o_norm2")?
                * need(params.q_max, "q_max")?
        }
        BoundMode::SparseChannel => {
            epsilon
                * need(params.s_n, "s_n")?
                * need(params.o_norm2, "o_norm2")?
                * need(params.q_max, "q_max")?
        }
    };
    if !(bound >= 0.0) {
        return Err(Error::InvalidArgument(format!("negative bound {bound}")));
    }
    Ok(PredictionBoundReport {
        bound,
        mode,
        epsilon,
        params: params.clone(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientNorms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub sparsity: usize,
}

/// Norms of the ONB coefficient vector.
pub fn coefficient_norms(x: &SparseOperatorExpansion) -> CoefficientNorms {
    let onb = x.to_convention(Convention::Onb);
    CoefficientNorms {
        l1: onb.l1_norm(),
        l2: onb.l2_norm(),
        linf: onb.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max),
        sparsity: onb.sparsity(),
    }
}

/// Rescaling with `α̃ = α / q_max` and `β̃ = β · q_max`; leaves `‖α‖₁‖β‖₁` and
/// both sparsities unchanged, so every bound above is unaffected.
pub fn alternative_normalization(
    rho: &SparseOperatorExpansion,
    o: &SparseOperatorExpansion,
    q_max: f64,
) -> (Vec<(PauliString, f64)>, Vec<(PauliString, f64)>) {
    let a = rho.to_convention(Convention::Onb);
    let b = o.to_convention(Convention::Onb);
    (
        a.iter().map(|(p, v)| (p.clone(), v / q_max)).collect(),
        b.iter().map(|(p, v)| (p.clone(), v * q_max)).collect(),
    )
}

/// Hermitian orthonormal basis of `B(C^{2ⁿ})` under the Hilbert-Schmidt product.
#[derive(Clone, Debug)]
pub struct HermitianONB {
    n: usize,
    ops: Vec<DenseOperator>,
    norms: Vec<f64>,
}

pub const ONB_TOL: f64 = 1e-9;

impl HermitianONB {
    pub fn new(ops: Vec<DenseOperator>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty basis".into()))?;
        let n = first.qubits();
        check_qubits(2 * n)?;
        let d2 = 1usize << (2 * n);
        if ops.len() != d2 {
            return Err(Error::InvalidArgument(format!(
                "basis has {} elements, need {d2}",
                ops.len()
            )));
        }
        for (i, q) in ops.iter().enumerate() {
            if q.qubits() != n {
                return Err(Error::DimensionMismatch {
                    expected: 1 << n,
                    found: q.dim(),
                });
            }
            q.require_hermitian(ONB_TOL)?;
            for (j, p) in ops.iter().enumerate().skip(i) {
                let g = q.trace_product(p)?;
                let want = if i == j { 1.0 } else { 0.0 };
                if (g - Complex64::new(want, 0.0)).norm() > ONB_TOL {
                    return Err(Error::InvalidArgument(format!(
                        "elements {i}, {j} have inner product {g}"
                    )));
                }
            }
        }
        let norms = ops.iter().map(|q| q.operator_norm()).collect();
        Ok(Self { n, ops, norms })
    }

    /// Normalized Paulis `σ_A / √(2ⁿ)` in string-index order.
    pub fn pauli(n: usize) -> Result<Self> {
        check_qubits(2 * n)?;
        let s = Complex64::new(1.0 / (2f64).powi(n as i32).sqrt(), 0.0);
        let ops = PauliString::all(n)
            .map(|p| Ok(DenseOperator::from_pauli(&p)?.scale(s)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(ops)
    }

    /// Generalized Gell-Mann family: symmetric, antisymmetric and diagonal units.
    pub fn gell_mann(n: usize) -> Result<Self> {
        check_qubits(2 * n)?;
        let d = 1usize << n;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut ops = Vec::with_capacity(d * d);
        for i in 0..d {
            let mut m = DenseOperator::zeros(n)?;
            m.set(i, i, Complex64::new(1.0, 0.0));
            ops.push(m);
        }
        for i in 0..d {
            for j in i + 1..d {
                let mut s = DenseOperator::zeros(n)?;
                s.set(i, j, Complex64::new(h, 0.0));
                s.set(j, i, Complex64::new(h, 0.0));
                ops.push(s);
                let mut a = DenseOperator::zeros(n)?;
                a.set(i, j, Complex64::new(0.0, h));
                a.set(j, i, Complex64::new(0.0, -h));
                ops.push(a);
            }
        }
        Self::new(ops)
    }

    /// Pauli basis conjugated by a Haar-ish random unitary.
    pub fn random_rotated<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        let u = crate::channel::random_channel(n, 1, rng)?.ops()[0].clone();
        let ud = u.adjoint();
        let base = Self::pauli(n)?;
        let ops = base
            .ops
            .iter()
            .map(|q| u.mul(q)?.mul(&ud))
            .collect::<Result<Vec<_>>>()?;
        Self::new(ops)
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn element(&self, i: usize) -> &DenseOperator {
        &self.ops[i]
    }

    pub fn op_norm(&self, i: usize) -> f64 {
        self.norms[i]
    }

    pub fn max_op_norm(&self) -> f64 {
        self.norms.iter().cloned().fold(0.0, f64::max)
    }
}

/// `R[i][j] = tr[Q_i N(Q_j)]`.
pub fn general_tm(ch: &ChannelRep, q: &HermitianONB) -> Result<DMatrix<f64>> {
    let n = q.qubits();
    if n > 3 {
        return Err(Error::DimensionGuard { qubits: n, max: 3 });
    }
    if ch.qubits() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: ch.qubits(),
        });
    }
    let kraus = ch.to_kraus()?;
    let images = (0..q.len())
        .map(|j| kraus.apply(q.element(j)))
        .collect::<Result<Vec<_>>>()?;
    let mut out = DMatrix::zeros(q.len(), q.len());
    for i in 0..q.len() {
        for (j, img) in images.iter().enumerate() {
            out[(i, j)] = q.element(i).trace_product(img)?.re;
        }
    }
    Ok(out)
}

/// `C[a][b] = tr[P_a Q_b]` between two ONBs.
pub fn basis_change(p: &HermitianONB, q: &HermitianONB) -> Result<DMatrix<f64>> {
    let mut c = DMatrix::zeros(p.len(), q.len());
    for a in 0..p.len() {
        for b in 0..q.len() {
            c[(a, b)] = p.element(a).trace_product(q.element(b))?.re;
        }
    }
    Ok(c)
}

/// Two-outcome effect `E = ½(I ⊗ I + Q_jᵀ/‖Q_j‖ ⊗ Q_i/‖Q_i‖)` on Choi copies.
#[derive(Clone, Debug)]
pub struct EffectOperator {
    pub op: DenseOperator,
    /// `2ⁿ ‖Q_i‖∞ ‖Q_j‖∞`.
    pub scale: f64,
}

impl EffectOperator {
    /// `tr[Q_i N(Q_j)]` from the acceptance probability `tr[E · Choi]`.
    pub fn decode(&self, prob: f64) -> f64 {
        self.scale * 2.0 * (prob - 0.5)
    }
}

pub fn general_effect_operators(q: &HermitianONB, i: usize, j: usize) -> Result<EffectOperator> {
    if i >= q.len() || j >= q.len() {
        return Err(Error::InvalidArgument(format!(
            "index ({i}, {j}) outside a basis of {}",
            q.len()
        )));
    }
    let n = q.qubits();
    let (ni, nj) = (q.op_norm(i), q.op_norm(j));
    let qj = q.element(j).transpose().scale(Complex64::new(1.0 / nj, 0.0));
    let qi = q.element(i).scale(Complex64::new(1.0 / ni, 0.0));
    let op = DenseOperator::identity(2 * n)?
        .add(&qj.kron(&qi)?)?
        .scale(Complex64::new(0.5, 0.0));
    Ok(EffectOperator {
        op,
        scale: (1u64 << n) as f64 * ni * nj,
    })
}
