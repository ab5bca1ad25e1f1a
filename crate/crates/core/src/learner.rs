//! Two-phase Bell-sampling shadow tomography on Choi copies, and the PTM
//! learners built on it.
//!
//! Phase 1 spends `n₁ = ⌈32 ln(4M/δ)/ε⁴⌉` Bell rounds to estimate every squared
//! expectation `tr[Pρ]²`. Phase 2 spends `n₂ = ⌈8 ln(4S/δ)/ε²⌉` single copies
//! per surviving string to fix its sign. Each phase gets `δ/2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::PTMatrix;
use crate::error::{Error, Result};
use crate::pauli::{transpose_sign, PauliString};
use crate::sim::{bell_character_sums, ChoiOracle, RngStream};

/// Largest `n` for which the full `16ⁿ`-entry PTM is learned.
pub const MAX_PTM_QUBITS: usize = 3;

/// Round counts beyond this are refused rather than silently saturated.
const MAX_ROUNDS: f64 = 4.0e18;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerBudget {
    pub epsilon: f64,
    pub delta: f64,
    /// Bell rounds in phase 1 (two copies each).
    pub n1: u64,
    /// Shots per selected string in phase 2.
    pub n2: u64,
    pub targets: usize,
    pub selected: usize,
    /// True when `n1`, `n2` come from the Hoeffding formulas.
    pub from_formula: bool,
}

impl LearnerBudget {
    pub fn phase1_rounds(epsilon: f64, delta: f64, targets: usize) -> Result<u64> {
        let v = (32.0 * (4.0 * targets as f64 / delta).ln() / epsilon.powi(4)).ceil();
        to_count(v)
    }

    pub fn phase2_shots(epsilon: f64, delta: f64, selected: usize) -> Result<u64> {
        if selected == 0 {
            return Ok(0);
        }
        let v = (8.0 * (4.0 * selected as f64 / delta).ln() / epsilon.powi(2)).ceil();
        to_count(v)
    }

    /// `2·n₁ + S·n₂`.
    pub fn copies(&self) -> u128 {
        2 * self.n1 as u128 + self.selected as u128 * self.n2 as u128
    }
}

fn to_count(v: f64) -> Result<u64> {
    if !v.is_finite() || v > MAX_ROUNDS {
        return Err(Error::Budget(format!("{v:e} rounds requested")));
    }
    Ok((v as u64).max(1))
}

fn check_eps_delta(epsilon: f64, delta: f64, eps_max: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < eps_max) {
        return Err(Error::InvalidArgument(format!(
            "epsilon {epsilon} outside (0, {eps_max})"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta {delta} outside (0, 1)")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShadowEstimates {
    /// One estimate per target, in target order.
    pub values: Vec<f64>,
    /// Phase-1 squared-magnitude estimates, in target order.
    pub squared: Vec<f64>,
    pub budget: LearnerBudget,
    pub copies: u64,
}

/// Estimates `tr[σ_P ρ]` for every target from copies handed out by `oracle`.
pub fn shadow_pauli_estimates(
    oracle: &ChoiOracle,
    targets: &[PauliString],
    epsilon: f64,
    delta: f64,
    rng: &RngStream,
) -> Result<ShadowEstimates> {
    check_eps_delta(epsilon, delta, 1.0)?;
    if targets.is_empty() {
        return Err(Error::InvalidArgument("no target strings".into()));
    }
    let m = oracle.qubits();
    for t in targets {
        if t.len() != m {
            return Err(Error::LengthMismatch {
                left: m,
                right: t.len(),
            });
        }
        if t.is_identity() {
            return Err(Error::InvalidArgument(
                "identity target; its expectation is 1".into(),
            ));
        }
    }
    let start = oracle.copies_used();
    let n1 = LearnerBudget::phase1_rounds(epsilon, delta, targets.len())?;

    let hist = oracle.bell_histogram(n1, &rng.derive_label("phase1"))?;
    let mut sums: Vec<f64> = hist.iter().map(|&c| c as f64).collect();
    bell_character_sums(&mut sums, m);
    let squared: Vec<f64> = targets.iter().map(|t| sums[t.index()] / n1 as f64).collect();

    let cut = epsilon * epsilon / 2.0;
    let selected: Vec<usize> = (0..targets.len()).filter(|&i| squared[i] > cut).collect();
    let n2 = LearnerBudget::phase2_shots(epsilon, delta, selected.len())?;
    let phase2 = rng.derive_label("phase2");
    let signs: Vec<(usize, f64)> = selected
        .par_iter()
        .map(|&i| {
            let t = &targets[i];
            let plus = oracle.pauli_plus_count(t, n2, &phase2.derive(t.index() as u64))?;
            Ok((i, if 2 * plus >= n2 { 1.0 } else { -1.0 }))
        })
        .collect::<Result<_>>()?;

    let mut values = vec![0.0; targets.len()];
    for (i, s) in signs {
        values[i] = s * squared[i].clamp(0.0, 1.0).sqrt();
    }
    let budget = LearnerBudget {
        epsilon,
        delta,
        n1,
        n2,
        targets: targets.len(),
        selected: selected.len(),
        from_formula: true,
    };
    Ok(ShadowEstimates {
        values,
        squared,
        budget,
        copies: oracle.copies_used() - start,
    })
}

/// Classical description of a channel learned from Choi copies.
#[derive(Clone, Debug, PartialEq)]
pub struct PTMEstimate {
    pub ptm: PTMatrix,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub budget: LearnerBudget,
    pub copies: u64,
}

fn channel_qubits(oracle: &ChoiOracle) -> Result<usize> {
    let m = oracle.qubits();
    if !m.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "Choi copies must have an even qubit count, got {m}"
        )));
    }
    let n = m / 2;
    if n > MAX_PTM_QUBITS {
        return Err(Error::DimensionGuard {
            qubits: n,
            max: MAX_PTM_QUBITS,
        });
    }
    Ok(n)
}

/// Learns every PTM entry to accuracy `ε` with probability `≥ 1 − δ`.
pub fn learn_ptm(oracle: &ChoiOracle, epsilon: f64, delta: f64, rng: &RngStream) -> Result<PTMEstimate> {
    let n = channel_qubits(oracle)?;
    check_eps_delta(epsilon, delta, 1.0 / 3.0)?;
    let d2 = 1usize << (2 * n);
    // σ_B ⊗ σ_A sits at index B·4ⁿ + A
    let targets: Vec<PauliString> = (1..d2 * d2).map(|i| PauliString::from_index(i, 2 * n)).collect();
    let est = shadow_pauli_estimates(oracle, &targets, epsilon, delta, &rng.derive_label("ptm"))?;
    let mut ptm = PTMatrix::zeros(n)?;
    ptm.set(0, 0, 1.0);
    for (t, v) in targets.iter().zip(&est.values) {
        let (b, a) = (t.index() / d2, t.index() % d2);
        let s = transpose_sign(&PauliString::from_index(b, n));
        ptm.set(a, b, s * v);
    }
    Ok(PTMEstimate {
        ptm,
        epsilon,
        delta,
        seed: rng.seed(),
        budget: est.budget,
        copies: est.copies,
    })
}

/// Thresholded sparse PTM: entries learned at `ε/3`, kept when `|r̃| > ε/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparsePTMReport {
    pub n: usize,
    pub entries: Vec<(PauliString, PauliString, f64)>,
    pub epsilon: f64,
    pub threshold: f64,
    pub delta: f64,
    pub seed: u64,
    pub budget: LearnerBudget,
    pub copies: u64,
}

impl SparsePTMReport {
    pub fn get(&self, a: &PauliString, b: &PauliString) -> f64 {
        self.entries
            .iter()
            .find(|(x, y, _)| x == a && y == b)
            .map(|e| e.2)
            .unwrap_or(0.0)
    }
}

pub fn threshold_sparse_ptm(
    oracle: &ChoiOracle,
    epsilon: f64,
    delta: f64,
    rng: &RngStream,
) -> Result<SparsePTMReport> {
    check_eps_delta(epsilon, delta, 1.0)?;
    let inner = learn_ptm(oracle, epsilon / 3.0, delta, rng)?;
    let threshold = epsilon / 2.0;
    let n = inner.ptm.qubits();
    let entries = inner
        .ptm
        .nonzeros(threshold)
        .into_iter()
        .collect::<Vec<_>>();
    Ok(SparsePTMReport {
        n,
        entries,
        epsilon,
        threshold,
        delta,
        seed: inner.seed,
        budget: inner.budget,
        copies: inner.copies,
    })
}

/// JSON form `{n, epsilon, delta, seed, entries: [[A, B, value], …], …}`.
///
/// Entries equal to zero are omitted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PTMEstimateJson {
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub entries: Vec<(PauliString, PauliString, f64)>,
    pub budget: LearnerBudget,
    pub copies: u64,
}

impl From<&PTMEstimate> for PTMEstimateJson {
    fn from(e: &PTMEstimate) -> Self {
        Self {
            n: e.ptm.qubits(),
            epsilon: e.epsilon,
            delta: e.delta,
            seed: e.seed,
            threshold: None,
            entries: e.ptm.nonzeros(0.0),
            budget: e.budget.clone(),
            copies: e.copies,
        }
    }
}

impl From<&SparsePTMReport> for PTMEstimateJson {
    fn from(r: &SparsePTMReport) -> Self {
        Self {
            n: r.n,
            epsilon: r.epsilon,
            delta: r.delta,
            seed: r.seed,
            threshold: Some(r.threshold),
            entries: r.entries.clone(),
            budget: r.budget.clone(),
            copies: r.copies,
        }
    }
}

impl PTMEstimateJson {
    /// Dense PTM with omitted entries set to zero.
    pub fn to_ptm(&self) -> Result<PTMatrix> {
        let mut m = PTMatrix::zeros(self.n)?;
        for (a, b, v) in &self.entries {
            if a.len() != self.n || b.len() != self.n {
                return Err(Error::LengthMismatch {
                    left: self.n,
                    right: a.len().max(b.len()),
                });
            }
            m.set(a.index(), b.index(), *v);
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{identity_channel, ChannelRep};
    use crate::sim::DensityMatrix;

    #[test]
    fn hoeffding_counts() {
        // 32 ln(4·15/0.1) / 0.2⁴
        let n1 = LearnerBudget::phase1_rounds(0.2, 0.1, 15).unwrap();
        assert_eq!(n1, (32.0 * 600f64.ln() / 0.0016f64).ceil() as u64);
        assert_eq!(LearnerBudget::phase2_shots(0.2, 0.1, 0).unwrap(), 0);
        assert_eq!(
            LearnerBudget::phase2_shots(0.5, 0.1, 3).unwrap(),
            (8.0 * 120f64.ln() / 0.25).ceil() as u64
        );
        assert!(LearnerBudget::phase1_rounds(1e-6, 0.1, 15).is_err());
    }

    #[test]
    fn maximally_mixed_gives_exact_zeros() {
        let o = ChoiOracle::new(DensityMatrix::maximally_mixed(2).unwrap()).unwrap();
        let targets: Vec<PauliString> = (1..16).map(|i| PauliString::from_index(i, 2)).collect();
        let est = shadow_pauli_estimates(&o, &targets, 0.3, 0.1, &RngStream::new(3)).unwrap();
        assert!(est.values.iter().all(|&v| v == 0.0));
        assert_eq!(est.budget.selected, 0);
        assert_eq!(est.copies, 2 * est.budget.n1);
    }

    #[test]
    fn identity_channel_zz() {
        let o = ChoiOracle::from_channel(&ChannelRep::Kraus(identity_channel(1).unwrap())).unwrap();
        let zz: PauliString = "ZZ".parse().unwrap();
        let est =
            shadow_pauli_estimates(&o, &[zz, "YY".parse().unwrap()], 0.2, 0.05, &RngStream::new(8))
                .unwrap();
        assert!((est.values[0] - 1.0).abs() <= 0.2);
        assert!((est.values[1] + 1.0).abs() <= 0.2);
        assert_eq!(est.copies as u128, est.budget.copies());
    }

    #[test]
    fn bad_inputs() {
        let o = ChoiOracle::new(DensityMatrix::maximally_mixed(2).unwrap()).unwrap();
        let s = RngStream::new(0);
        assert!(shadow_pauli_estimates(&o, &[], 0.2, 0.1, &s).is_err());
        assert!(shadow_pauli_estimates(&o, &["II".parse().unwrap()], 0.2, 0.1, &s).is_err());
        assert!(learn_ptm(&o, 0.4, 0.1, &s).is_err());
        assert!(learn_ptm(&o, 0.2, 1.0, &s).is_err());
        let big = ChoiOracle::new(DensityMatrix::maximally_mixed(8).unwrap()).unwrap();
        assert!(matches!(
            learn_ptm(&big, 0.2, 0.1, &s),
            Err(Error::DimensionGuard { .. })
        ));
    }
}
