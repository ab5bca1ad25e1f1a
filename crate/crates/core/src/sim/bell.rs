use std::io::{Read, Write};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Binomial;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::RngStream;
use super::state::DensityMatrix;
use crate::error::{Error, Result};
use crate::pauli::{check_qubits, tensor_transform, PauliString};

/// Outcome of a Bell measurement on one qubit pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum BellLabel {
    PhiPlus = 0,
    PsiPlus = 1,
    PhiMinus = 2,
    PsiMinus = 3,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PhiPlus,
        BellLabel::PsiPlus,
        BellLabel::PhiMinus,
        BellLabel::PsiMinus,
    ];

    pub fn from_code(code: u8) -> Result<Self> {
        Self::ALL
            .get(code as usize)
            .copied()
            .ok_or_else(|| Error::Parse(format!("Bell label code {code}")))
    }
}

/// Eigenvalue of `σ_a ⊗ σ_a` on Bell state `b`.
pub const BELL_SIGNS: [[f64; 4]; 4] = [
    [1.0, 1.0, 1.0, 1.0],
    [1.0, 1.0, -1.0, -1.0],
    [-1.0, 1.0, 1.0, -1.0],
    [1.0, -1.0, 1.0, -1.0],
];

pub fn bell_sign(a: u8, b: BellLabel) -> f64 {
    BELL_SIGNS[a as usize][b as usize]
}

/// `χ_P(b) = Π_k f(P_k, b_k)` for an outcome string given by its base-4 index.
pub fn bell_character(p: &PauliString, outcome: usize) -> f64 {
    let m = p.len();
    p.symbols()
        .iter()
        .enumerate()
        .map(|(k, &a)| BELL_SIGNS[a as usize][(outcome >> (2 * (m - 1 - k))) & 3])
        .product()
}

/// Maps a vector over outcomes `b` to `Σ_b χ_P(b) v(b)` for every `P`.
pub fn bell_character_sums(values: &mut [f64], m: usize) {
    tensor_transform(values, m, &BELL_SIGNS);
}

/// Exact outcome law `p(b) = 4^{−m} Σ_Q χ_Q(b) tr[Qρ]²` of one round on `ρ ⊗ ρ`.
pub fn bell_distribution(rho: &DensityMatrix) -> Result<Vec<f64>> {
    let m = rho.qubits();
    check_qubits(m)?;
    let mut v: Vec<f64> = rho.pauli_expectations().into_iter().map(|e| e * e).collect();
    let mut kernel = [[0.0; 4]; 4];
    for (a, row) in BELL_SIGNS.iter().enumerate() {
        for (b, &s) in row.iter().enumerate() {
            kernel[b][a] = s;
        }
    }
    tensor_transform(&mut v, m, &kernel);
    let scale = v.len() as f64;
    for x in v.iter_mut() {
        // rounding can leave tiny negatives on forbidden outcomes
        *x = (*x / scale).max(0.0);
    }
    Ok(v)
}

/// Per-round Bell outcomes, one byte per qubit pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BellOutcomeRecord {
    m: usize,
    codes: Vec<u8>,
}

const DUMP_MAGIC: &[u8; 8] = b"PTMBELL\0";
const DUMP_VERSION: u32 = 1;

impl BellOutcomeRecord {
    pub fn qubits(&self) -> usize {
        self.m
    }

    pub fn rounds(&self) -> usize {
        self.codes.len().checked_div(self.m).unwrap_or(0)
    }

    pub fn round(&self, r: usize) -> Vec<BellLabel> {
        self.codes[r * self.m..(r + 1) * self.m]
            .iter()
            .map(|&c| BellLabel::ALL[c as usize])
            .collect()
    }

    /// Base-4 index of round `r`'s outcome string.
    pub fn outcome_index(&self, r: usize) -> usize {
        self.codes[r * self.m..(r + 1) * self.m]
            .iter()
            .fold(0, |acc, &c| acc * 4 + c as usize)
    }

    fn push_index(&mut self, mut idx: usize) {
        let start = self.codes.len();
        self.codes.resize(start + self.m, 0);
        for k in (0..self.m).rev() {
            self.codes[start + k] = (idx & 3) as u8;
            idx >>= 2;
        }
    }

    /// Binary dump: magic `PTMBELL\0`, then little-endian `u32` version,
    /// `u32` pair count `m`, `u64` round count, then `m` label bytes per round
    /// (`0 = Φ⁺, 1 = Ψ⁺, 2 = Φ⁻, 3 = Ψ⁻`).
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&DUMP_VERSION.to_le_bytes())?;
        w.write_all(&(self.m as u32).to_le_bytes())?;
        w.write_all(&(self.rounds() as u64).to_le_bytes())?;
        w.write_all(&self.codes)
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let io = |e: std::io::Error| Error::Parse(format!("Bell dump: {e}"));
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != DUMP_MAGIC {
            return Err(Error::Parse("Bell dump: bad magic".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4).map_err(io)?;
        let version = u32::from_le_bytes(b4);
        if version != DUMP_VERSION {
            return Err(Error::Parse(format!("Bell dump: unsupported version {version}")));
        }
        r.read_exact(&mut b4).map_err(io)?;
        let m = u32::from_le_bytes(b4) as usize;
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8).map_err(io)?;
        let rounds = u64::from_le_bytes(b8) as usize;
        let mut codes = vec![0u8; rounds * m];
        r.read_exact(&mut codes).map_err(io)?;
        if codes.iter().any(|&c| c > 3) {
            return Err(Error::Parse("Bell dump: label code out of range".into()));
        }
        Ok(Self { m, codes })
    }
}

const ROUNDS_PER_CHUNK: usize = 4096;

/// Draws `rounds` independent Bell rounds on `ρ ⊗ ρ`.
///
/// Rounds are generated in fixed-size chunks, each from its own substream, so
/// the record is identical for any thread count.
pub fn bell_sample(rho: &DensityMatrix, rounds: usize, rng: &RngStream) -> Result<BellOutcomeRecord> {
    let dist = bell_distribution(rho)?;
    sample_from_distribution(&dist, rho.qubits(), rounds, rng)
}

pub fn sample_from_distribution(
    dist: &[f64],
    m: usize,
    rounds: usize,
    rng: &RngStream,
) -> Result<BellOutcomeRecord> {
    let w = WeightedIndex::new(dist)
        .map_err(|e| Error::InvalidState(format!("Bell distribution: {e}")))?;
    let chunks = rounds.div_ceil(ROUNDS_PER_CHUNK);
    let parts: Vec<Vec<usize>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = ROUNDS_PER_CHUNK.min(rounds - c * ROUNDS_PER_CHUNK);
            let mut r = rng.derive(c as u64).rng();
            (0..len).map(|_| w.sample(&mut r)).collect()
        })
        .collect();
    let mut rec = BellOutcomeRecord {
        m,
        codes: Vec::with_capacity(rounds * m),
    };
    for idx in parts.into_iter().flatten() {
        rec.push_index(idx);
    }
    Ok(rec)
}

/// Outcome counts of `trials` independent categorical draws, drawn exactly as
/// a multinomial through sequential conditional binomials.
pub fn multinomial<R: Rng + ?Sized>(probs: &[f64], trials: u64, rng: &mut R) -> Result<Vec<u64>> {
    let total: f64 = probs.iter().sum();
    if !(total > 0.0) || probs.iter().any(|&p| p < 0.0 || !p.is_finite()) {
        return Err(Error::InvalidArgument("invalid probability vector".into()));
    }
    let mut counts = vec![0u64; probs.len()];
    let mut left = trials;
    let mut mass = total;
    for (i, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i + 1 == probs.len() || p >= mass {
            counts[i] = left;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let k = Binomial::new(left, q)
            .map_err(|e| Error::InvalidArgument(format!("binomial: {e}")))?
            .sample(rng);
        counts[i] = k;
        left -= k;
        mass -= p;
    }
    Ok(counts)
}

/// Histogram of `rounds` Bell rounds indexed by outcome string.
pub fn bell_histogram(rho: &DensityMatrix, rounds: u64, rng: &RngStream) -> Result<Vec<u64>> {
    let dist = bell_distribution(rho)?;
    multinomial(&dist, rounds, &mut rng.rng())
}

fn check_pauli(rho: &DensityMatrix, p: &PauliString) -> Result<()> {
    if p.is_identity() {
        return Err(Error::InvalidArgument(
            "identity string has no ±1 outcomes".into(),
        ));
    }
    if p.len() != rho.qubits() {
        return Err(Error::LengthMismatch {
            left: rho.qubits(),
            right: p.len(),
        });
    }
    Ok(())
}

/// I.i.d. `±1` eigenvalue outcomes of measuring `P` on fresh copies of `ρ`.
pub fn pauli_outcome_sample(
    rho: &DensityMatrix,
    p: &PauliString,
    shots: usize,
    rng: &RngStream,
) -> Result<Vec<i8>> {
    check_pauli(rho, p)?;
    let plus = ((1.0 + rho.pauli_expectation(p)?) / 2.0).clamp(0.0, 1.0);
    let mut r = rng.rng();
    Ok((0..shots)
        .map(|_| if r.random_bool(plus) { 1 } else { -1 })
        .collect())
}

/// Number of `+1` outcomes among `shots` measurements of `P`, given `tr[Pρ]`.
pub fn pauli_plus_count(expectation: f64, shots: u64, rng: &RngStream) -> Result<u64> {
    let plus = ((1.0 + expectation) / 2.0).clamp(0.0, 1.0);
    Ok(Binomial::new(shots, plus)
        .map_err(|e| Error::InvalidArgument(format!("binomial: {e}")))?
        .sample(&mut rng.rng()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::DenseOperator;
    use num_complex::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn bell_vectors() -> [[Complex64; 4]; 4] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        [
            [c(h), c(0.0), c(0.0), c(h)],
            [c(0.0), c(h), c(h), c(0.0)],
            [c(h), c(0.0), c(0.0), c(-h)],
            [c(0.0), c(h), c(-h), c(0.0)],
        ]
    }

    #[test]
    fn sign_table_matches_dense_eigenvalues() {
        for a in 1..=3u8 {
            let s = PauliString::new(vec![a]).unwrap();
            let ss = DenseOperator::from_pauli(&s.tensor(&s)).unwrap();
            let mut plus = 0;
            for (b, v) in bell_vectors().iter().enumerate() {
                let proj = DenseOperator::projector(v).unwrap();
                let ev = ss.trace_product(&proj).unwrap().re;
                assert!((ev - BELL_SIGNS[a as usize][b]).abs() < 1e-14);
                if ev > 0.0 {
                    plus += 1;
                }
            }
            assert_eq!(plus, 2);
        }
    }

    #[test]
    fn zero_state_never_gives_psi() {
        let rho = DensityMatrix::pure(&[c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap();
        let p = bell_distribution(&rho).unwrap();
        assert!((p[0] - 0.25).abs() < 1e-14); // Φ⁺Φ⁺
        assert!((p[2] - 0.25).abs() < 1e-14); // Φ⁺Φ⁻
        assert!((p[10] - 0.25).abs() < 1e-14); // Φ⁻Φ⁻
        assert!(p[1].abs() < 1e-14 && p[5].abs() < 1e-14);
    }

    #[test]
    fn maximally_mixed_is_uniform() {
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        for x in bell_distribution(&rho).unwrap() {
            assert!((x - 1.0 / 16.0).abs() < 1e-14);
        }
    }

    #[test]
    fn dump_round_trip() {
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        let rec = bell_sample(&rho, 10, &RngStream::new(4)).unwrap();
        assert_eq!(rec.rounds(), 10);
        assert_eq!(rec.round(3).len(), 2);
        let mut buf = Vec::new();
        rec.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 24 + 20);
        assert_eq!(BellOutcomeRecord::read_from(&buf[..]).unwrap(), rec);
        buf[0] = b'X';
        assert!(BellOutcomeRecord::read_from(&buf[..]).is_err());
    }

    #[test]
    fn multinomial_conserves_trials() {
        let mut r = RngStream::new(2).rng();
        let counts = multinomial(&[0.2, 0.0, 0.5, 0.3], 1_000_000_000_000, &mut r).unwrap();
        assert_eq!(counts.iter().sum::<u64>(), 1_000_000_000_000);
        assert_eq!(counts[1], 0);
        let f = counts[2] as f64 / 1e12;
        assert!((f - 0.5).abs() < 1e-5);
    }

    #[test]
    fn pauli_samples() {
        let rho = DensityMatrix::pure(&[c(1.0), c(0.0)]).unwrap();
        let z: PauliString = "Z".parse().unwrap();
        let s = pauli_outcome_sample(&rho, &z, 100, &RngStream::new(1)).unwrap();
        assert!(s.iter().all(|&x| x == 1));
        assert!(pauli_outcome_sample(&rho, &"I".parse().unwrap(), 1, &RngStream::new(1)).is_err());
    }
}
