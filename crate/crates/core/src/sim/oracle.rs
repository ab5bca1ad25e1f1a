use std::sync::atomic::{AtomicU64, Ordering};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use super::bell::{bell_distribution, multinomial, pauli_plus_count, sample_from_distribution};
use super::rng::RngStream;
use super::state::{choi_state, DensityMatrix};
use super::BellOutcomeRecord;
use crate::channel::ChannelRep;
use crate::error::{Error, Result};
use crate::pauli::PauliString;

/// Copy source for a fixed state (usually a Choi state) that counts every copy handed out.
///
/// Exact Pauli expectations and the Bell outcome law are precomputed once.
#[derive(Debug)]
pub struct ChoiOracle {
    state: DensityMatrix,
    expectations: Vec<f64>,
    bell: Vec<f64>,
    copies: AtomicU64,
}

impl ChoiOracle {
    pub fn new(state: DensityMatrix) -> Result<Self> {
        let bell = bell_distribution(&state)?;
        let expectations = state.pauli_expectations();
        Ok(Self {
            state,
            expectations,
            bell,
            copies: AtomicU64::new(0),
        })
    }

    pub fn from_channel(ch: &ChannelRep) -> Result<Self> {
        Self::new(choi_state(ch)?)
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    /// Qubits per copy.
    pub fn qubits(&self) -> usize {
        self.state.qubits()
    }

    pub fn copies_used(&self) -> u64 {
        self.copies.load(Ordering::Relaxed)
    }

    fn charge(&self, copies: u64) -> Result<()> {
        self.copies
            .fetch_update(Ordering::Relaxed, Ordering::Relaxed, |c| c.checked_add(copies))
            .map(|_| ())
            .map_err(|_| Error::Budget("copy counter overflowed u64".into()))
    }

    /// Outcome histogram of `rounds` Bell rounds (two copies each).
    pub fn bell_histogram(&self, rounds: u64, rng: &RngStream) -> Result<Vec<u64>> {
        let copies = rounds
            .checked_mul(2)
            .ok_or_else(|| Error::Budget(format!("{rounds} rounds overflow the copy count")))?;
        self.charge(copies)?;
        multinomial(&self.bell, rounds, &mut rng.rng())
    }

    /// Round-by-round Bell outcomes (two copies each).
    pub fn bell_rounds(&self, rounds: usize, rng: &RngStream) -> Result<BellOutcomeRecord> {
        self.charge(2 * rounds as u64)?;
        sample_from_distribution(&self.bell, self.qubits(), rounds, rng)
    }

    /// `+1` count among `shots` single-copy measurements of `P`.
    pub fn pauli_plus_count(&self, p: &PauliString, shots: u64, rng: &RngStream) -> Result<u64> {
        if p.is_identity() || p.len() != self.qubits() {
            return Err(Error::InvalidArgument(format!(
                "cannot measure {p} on {} qubits",
                self.qubits()
            )));
        }
        self.charge(shots)?;
        pauli_plus_count(self.expectations[p.index()], shots, rng)
    }

    /// Measures one copy qubit-wise in the bases `basis` (symbols 1..3).
    ///
    /// Returns the outcome bits, bit `m−1−k` set when qubit `k` gave `−1`.
    pub fn measure_pauli_basis(&self, basis: &[u8], rng: &RngStream) -> Result<usize> {
        let dist = self.pauli_basis_distribution(basis)?;
        self.charge(1)?;
        let w = WeightedIndex::new(&dist)
            .map_err(|e| Error::InvalidState(format!("basis distribution: {e}")))?;
        Ok(w.sample(&mut rng.rng()))
    }

    /// Exact law of the outcome bits for a product Pauli basis.
    ///
    /// `p(s) = 2^{−m} Σ_S (−1)^{|s ∩ S|} tr[σ_{basis|S} ρ]`, a Walsh transform over subsets.
    pub fn pauli_basis_distribution(&self, basis: &[u8]) -> Result<Vec<f64>> {
        let m = self.qubits();
        if basis.len() != m || basis.iter().any(|&b| !(1..=3).contains(&b)) {
            return Err(Error::InvalidArgument(format!(
                "basis must have {m} symbols in 1..=3"
            )));
        }
        let dim = 1usize << m;
        let mut v: Vec<f64> = (0..dim)
            .map(|subset| {
                let idx = (0..m).fold(0usize, |acc, k| {
                    let on = (subset >> (m - 1 - k)) & 1 == 1;
                    acc * 4 + if on { basis[k] as usize } else { 0 }
                });
                self.expectations[idx]
            })
            .collect();
        let mut h = 1;
        while h < dim {
            for i in (0..dim).step_by(2 * h) {
                for j in i..i + h {
                    let (a, b) = (v[j], v[j + h]);
                    v[j] = a + b;
                    v[j + h] = a - b;
                }
            }
            h *= 2;
        }
        Ok(v.into_iter().map(|x| (x / dim as f64).max(0.0)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn basis_distribution_of_product_state() {
        let c = |x| Complex64::new(x, 0.0);
        // |0⟩ ⊗ |+⟩
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let rho = DensityMatrix::pure(&[c(h), c(h), c(0.0), c(0.0)]).unwrap();
        let o = ChoiOracle::new(rho).unwrap();
        let zx = o.pauli_basis_distribution(&[3, 1]).unwrap();
        assert!((zx[0] - 1.0).abs() < 1e-14);
        let zz = o.pauli_basis_distribution(&[3, 3]).unwrap();
        assert!((zz[0] - 0.5).abs() < 1e-14 && (zz[1] - 0.5).abs() < 1e-14);
        assert_eq!(o.measure_pauli_basis(&[3, 1], &RngStream::new(0)).unwrap(), 0);
        assert_eq!(o.copies_used(), 1);
    }

    #[test]
    fn copies_are_counted() {
        let o = ChoiOracle::new(DensityMatrix::maximally_mixed(2).unwrap()).unwrap();
        let s = RngStream::new(1);
        o.bell_histogram(10, &s).unwrap();
        o.bell_rounds(3, &s).unwrap();
        o.pauli_plus_count(&"XZ".parse().unwrap(), 7, &s).unwrap();
        assert_eq!(o.copies_used(), 20 + 6 + 7);
        assert!(o.pauli_plus_count(&"II".parse().unwrap(), 1, &s).is_err());
    }
}
