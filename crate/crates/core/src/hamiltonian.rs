//! Hamiltonian learning from short-time dynamics.
//!
//! Each coefficient `α(A)` is the time derivative at `t = 0` of
//! `½ tr[σ_B U_t(ρ)]` for a probe pair `(B, ρ)`. The derivative is read off a
//! Chebyshev interpolant through `L` evolution times in `(0, 1/h)`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelRep;
use crate::error::{Error, Result};
use crate::learner::learn_ptm;
use crate::pauli::{
    pauli_product, to_dense, Convention, DenseOperator, PauliString, SparseOperatorExpansion,
};
use crate::predict::predict_expectation;
use crate::sim::{evolve_unitary, ChoiOracle, DensityMatrix, RngStream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevSchedule {
    pub h: f64,
    pub epsilon: f64,
    /// Longest evolution time, `1/h`.
    pub t_max: f64,
    pub degree: usize,
    pub nodes: Vec<f64>,
    pub times: Vec<f64>,
    /// Accuracy each node's expectation value must meet.
    pub eps_node: f64,
}

/// `T_m(z)` for `m = 0..count` by the three-term recurrence.
pub fn chebyshev_values(z: f64, count: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(count);
    for m in 0..count {
        t.push(match m {
            0 => 1.0,
            1 => z,
            _ => 2.0 * z * t[m - 1] - t[m - 2],
        });
    }
    t
}

/// Degree for bound `h` and target `ε`: `⌈2 log₂(8h / (√(2π) ln 2 · ε))⌉`, at least 2.
pub fn chebyshev_degree(h: f64, epsilon: f64) -> usize {
    let arg = 8.0 * h / ((2.0 * std::f64::consts::PI).sqrt() * std::f64::consts::LN_2 * epsilon);
    ((2.0 * arg.log2()).ceil() as i64).max(2) as usize
}

pub fn chebyshev_schedule(h: f64, epsilon: f64) -> Result<ChebyshevSchedule> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("norm bound h = {h} must be positive")));
    }
    if !(epsilon > 0.0 && epsilon < h) {
        return Err(Error::InvalidArgument(format!(
            "epsilon {epsilon} must lie in (0, h = {h})"
        )));
    }
    let degree = chebyshev_degree(h, epsilon);
    Ok(schedule_with_degree(h, epsilon, degree))
}

/// Schedule for an explicit degree `L ≥ 2`; used for tests of the node formulas.
pub fn schedule_with_degree(h: f64, epsilon: f64, degree: usize) -> ChebyshevSchedule {
    let l = degree as f64;
    let t_max = 1.0 / h;
    let nodes: Vec<f64> = (1..=degree)
        .map(|i| -(((2 * i - 1) as f64) * std::f64::consts::PI / (2.0 * l)).cos())
        .collect();
    let times = nodes.iter().map(|z| t_max / 2.0 * (1.0 + z)).collect();
    let eps_node = 3.0 * t_max * epsilon / (4.0 * (l - 1.0) * l * (2.0 * l - 1.0));
    ChebyshevSchedule {
        h,
        epsilon,
        t_max,
        degree,
        nodes,
        times,
        eps_node,
    }
}

/// Derivative at `t = 0` of the Chebyshev interpolant through `(t_ℓ, values[ℓ])`.
pub fn interpolate_derivative(values: &[f64], s: &ChebyshevSchedule) -> Result<f64> {
    let l = s.degree;
    if values.len() != l {
        return Err(Error::InvalidArgument(format!(
            "{} values for {l} nodes",
            values.len()
        )));
    }
    let mut b = vec![0.0; l];
    for (z, v) in s.nodes.iter().zip(values) {
        for (m, t) in chebyshev_values(*z, l).into_iter().enumerate() {
            b[m] += v * t;
        }
    }
    // T_m'(−1) = (−1)^{m+1} m²
    let sum: f64 = (1..l)
        .map(|m| {
            let bm = 2.0 / l as f64 * b[m];
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            sign * (m * m) as f64 * bm
        })
        .sum();
    Ok(-2.0 / s.t_max * sum)
}

/// Probe isolating `α(A)`: observable `σ_B` and state `(I + i[σ_A, σ_B]/2)/2ⁿ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbePair {
    pub target: PauliString,
    pub observable: PauliString,
    pub state: SparseOperatorExpansion,
}

pub fn probe_pair(a: &PauliString) -> Result<ProbePair> {
    let j = a
        .symbols()
        .iter()
        .position(|&s| s != 0)
        .ok_or_else(|| Error::InvalidArgument("identity has no probe".into()))?;
    let bj = (1..=3u8).find(|&s| s != a.get(j)).unwrap_or(1);
    let mut word = vec![0u8; a.len()];
    word[j] = bj;
    let b = PauliString::new(word)?;
    let (phase, c) = pauli_product(a, &b)?;
    // σ_Aσ_B = ±i σ_C here, so i[σ_A, σ_B]/2 = i·phase·σ_C is real
    let coeff = -(phase.to_complex().im);
    let n = a.len();
    let norm = 1.0 / (1u64 << n) as f64;
    let state = SparseOperatorExpansion::from_entries(
        n,
        Convention::Unnormalized,
        [(PauliString::identity(n), norm), (c, coeff * norm)],
    )?;
    Ok(ProbePair {
        target: a.clone(),
        observable: b,
        state,
    })
}

fn commutator(h: &DenseOperator, x: &DenseOperator) -> Result<DenseOperator> {
    h.mul(x)?.sub(&x.mul(h)?)
}

/// `k`-th derivative of `f(t) = tr[σ_B U_t(ρ)]` at `τ`, as `iᵏ tr[C_k(σ_B) U_τ(ρ)]`.
pub fn time_derivative(
    h: &SparseOperatorExpansion,
    b: &PauliString,
    rho: &DensityMatrix,
    k: usize,
    tau: f64,
) -> Result<f64> {
    if k > 6 {
        return Err(Error::InvalidArgument(format!("derivative order {k} > 6")));
    }
    let hd = to_dense(h)?;
    let mut c = DenseOperator::from_pauli(b)?;
    for _ in 0..k {
        c = commutator(&hd, &c)?;
    }
    let u = hd.unitary_evolution(tau)?;
    let evolved = u.mul(rho.operator())?.mul(&u.adjoint())?;
    let ik = num_complex::Complex64::new(0.0, 1.0).powu(k as u32);
    Ok((ik * c.trace_product(&evolved)?).re)
}

/// `(2h)ᵏ`.
pub fn derivative_bound(h: f64, k: usize) -> f64 {
    (2.0 * h).powi(k as i32)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamMode {
    /// Node values computed exactly.
    Exact,
    /// Exact node values plus uniform noise of half-width `ε̃/2`.
    ExactNoisy,
    /// Node values predicted from PTMs learned on simulated Choi copies.
    Shadow,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianEstimate {
    pub target: PauliString,
    pub estimate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianReport {
    pub n: usize,
    pub mode: HamMode,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub schedule: ChebyshevSchedule,
    pub estimates: Vec<HamiltonianEstimate>,
    /// Choi copies consumed at each node (shadow mode only).
    pub node_copies: Vec<u64>,
    pub total_copies: u128,
}

impl HamiltonianReport {
    pub fn max_error(&self) -> Option<f64> {
        self.estimates
            .iter()
            .map(|e| e.truth.map(|t| (e.estimate - t).abs()))
            .try_fold(0.0f64, |acc, x| x.map(|x| acc.max(x)))
    }
}

/// Simulated access to `U_t = exp(−itH)` for a fixed hidden `H`.
#[derive(Clone, Debug)]
pub struct EvolutionOracle {
    h: SparseOperatorExpansion,
}

impl EvolutionOracle {
    pub fn new(h: SparseOperatorExpansion) -> Result<Self> {
        h.require(Convention::Unnormalized)?;
        Ok(Self { h })
    }

    pub fn qubits(&self) -> usize {
        self.h.qubits()
    }

    pub fn hamiltonian(&self) -> &SparseOperatorExpansion {
        &self.h
    }

    pub fn channel(&self, t: f64) -> Result<ChannelRep> {
        Ok(ChannelRep::Kraus(evolve_unitary(&self.h, t)?))
    }
}

fn observable(b: &PauliString) -> Result<SparseOperatorExpansion> {
    SparseOperatorExpansion::from_entries(b.len(), Convention::Unnormalized, [(b.clone(), 1.0)])
}

/// Estimates `α(A)` for every target to accuracy `ε` (with probability `1 − δ` in shadow mode).
pub fn learn_hamiltonian(
    oracle: &EvolutionOracle,
    targets: &[PauliString],
    epsilon: f64,
    delta: f64,
    h: f64,
    mode: HamMode,
    rng: &RngStream,
) -> Result<HamiltonianReport> {
    let n = oracle.qubits();
    if mode == HamMode::Shadow && n > 3 {
        return Err(Error::DimensionGuard { qubits: n, max: 3 });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta {delta} outside (0, 1)")));
    }
    let schedule = chebyshev_schedule(h, epsilon)?;
    let probes = targets.iter().map(probe_pair).collect::<Result<Vec<_>>>()?;
    let probe_states = probes
        .iter()
        .map(|p| DensityMatrix::from_expansion(&p.state))
        .collect::<Result<Vec<_>>>()?;

    // values[node][target] = ½ tr[σ_B U_t(ρ)] (estimated)
    let mut node_copies = vec![0u64; schedule.degree];
    let values: Vec<Vec<f64>> = match mode {
        HamMode::Exact | HamMode::ExactNoisy => schedule
            .times
            .iter()
            .enumerate()
            .map(|(l, &t)| {
                let ch = oracle.channel(t)?;
                probes
                    .iter()
                    .zip(&probe_states)
                    .enumerate()
                    .map(|(i, (p, rho))| {
                        let out = DensityMatrix::new(ch.apply(rho.operator())?)?;
                        let mut v = 0.5 * out.pauli_expectation(&p.observable)?;
                        if mode == HamMode::ExactNoisy {
                            let half = schedule.eps_node / 2.0;
                            let mut r = rng.derive_label("noise").derive(l as u64).derive(i as u64).rng();
                            v += r.random_range(-half..=half);
                        }
                        Ok(v)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?,
        HamMode::Shadow => {
            let per_node_delta = delta / schedule.degree as f64;
            let acc = schedule.eps_node / 2.0;
            let rows: Vec<(Vec<f64>, u64)> = schedule
                .times
                .par_iter()
                .enumerate()
                .map(|(l, &t)| {
                    let choi = ChoiOracle::from_channel(&oracle.channel(t)?)?;
                    let est = learn_ptm(&choi, acc, per_node_delta, &rng.derive_label("node").derive(l as u64))?;
                    let vals = probes
                        .iter()
                        .map(|p| Ok(0.5 * predict_expectation(&est, &p.state, &observable(&p.observable)?)?))
                        .collect::<Result<Vec<_>>>()?;
                    Ok((vals, choi.copies_used()))
                })
                .collect::<Result<_>>()?;
            rows.into_iter()
                .enumerate()
                .map(|(l, (v, c))| {
                    node_copies[l] = c;
                    v
                })
                .collect()
        }
    };

    let estimates = targets
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let series: Vec<f64> = values.iter().map(|row| row[i]).collect();
            Ok(HamiltonianEstimate {
                target: a.clone(),
                estimate: interpolate_derivative(&series, &schedule)?,
                truth: Some(oracle.hamiltonian().get(a)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let total_copies = node_copies.iter().map(|&c| c as u128).sum();
    Ok(HamiltonianReport {
        n,
        mode,
        epsilon,
        delta,
        seed: rng.seed(),
        schedule,
        estimates,
        node_copies,
        total_copies,
    })
}

/// Wire form `{n, terms: [["ZZ", 0.5], …]}` of an unnormalized Hamiltonian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianJson {
    pub n: usize,
    pub terms: Vec<(PauliString, f64)>,
}

impl HamiltonianJson {
    pub fn to_expansion(&self) -> Result<SparseOperatorExpansion> {
        SparseOperatorExpansion::from_entries(self.n, Convention::Unnormalized, self.terms.clone())
    }

    pub fn from_expansion(h: &SparseOperatorExpansion) -> Self {
        let h = h.to_convention(Convention::Unnormalized);
        Self {
            n: h.qubits(),
            terms: h.iter().map(|(p, v)| (p.clone(), *v)).collect(),
        }
    }
}

/// Random Hamiltonian with `Σ|α(A)| = norm_bound`, so `‖H‖ ≤ norm_bound`.
///
/// The identity coefficient is left at zero.
pub fn random_hamiltonian<R: Rng + ?Sized>(
    n: usize,
    norm_bound: f64,
    rng: &mut R,
) -> Result<SparseOperatorExpansion> {
    let d2 = 1usize << (2 * n);
    let raw: Vec<f64> = (1..d2).map(|_| rng.random_range(-1.0..1.0)).collect();
    let l1: f64 = raw.iter().map(|v| v.abs()).sum();
    SparseOperatorExpansion::from_entries(
        n,
        Convention::Unnormalized,
        raw.into_iter()
            .enumerate()
            .map(|(i, v)| (PauliString::from_index(i + 1, n), v * norm_bound / l1)),
    )
}
