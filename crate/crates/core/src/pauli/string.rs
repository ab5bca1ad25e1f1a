use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A tensor product of single-qubit Paulis, one symbol per qubit.
///
/// Symbols are `0 = I`, `1 = X`, `2 = Y`, `3 = Z`. Qubit 1 is the leftmost
/// symbol and the most significant tensor factor, so the basis index of
/// qubit `k` (0-based) sits at bit `len - 1 - k`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PauliString {
    word: Vec<u8>,
}

impl PauliString {
    pub fn new(word: Vec<u8>) -> Result<Self> {
        if let Some(&bad) = word.iter().find(|&&s| s > 3) {
            return Err(Error::InvalidSymbol(char::from(b'0' + bad.min(9))));
        }
        Ok(Self { word })
    }

    pub fn identity(len: usize) -> Self {
        Self { word: vec![0; len] }
    }

    /// Inverse of [`PauliString::index`].
    pub fn from_index(mut index: usize, len: usize) -> Self {
        let mut word = vec![0u8; len];
        for slot in word.iter_mut().rev() {
            *slot = (index % 4) as u8;
            index /= 4;
        }
        Self { word }
    }

    /// Base-4 index with the first qubit as the most significant digit.
    pub fn index(&self) -> usize {
        self.word.iter().fold(0usize, |acc, &s| acc * 4 + s as usize)
    }

    /// Every string of the given length in index order.
    pub fn all(len: usize) -> impl Iterator<Item = PauliString> {
        (0..1usize << (2 * len)).map(move |i| PauliString::from_index(i, len))
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.word
    }

    pub fn get(&self, qubit: usize) -> u8 {
        self.word[qubit]
    }

    pub fn is_identity(&self) -> bool {
        self.word.iter().all(|&s| s == 0)
    }

    pub fn weight(&self) -> usize {
        self.word.iter().filter(|&&s| s != 0).count()
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &PauliString) -> PauliString {
        let mut word = self.word.clone();
        word.extend_from_slice(&other.word);
        PauliString { word }
    }

    /// Splits into the first `at` qubits and the remainder.
    pub fn split_at(&self, at: usize) -> (PauliString, PauliString) {
        let (a, b) = self.word.split_at(at);
        (
            PauliString { word: a.to_vec() },
            PauliString { word: b.to_vec() },
        )
    }

    /// Bit mask of sites carrying X or Y (the bit-flip pattern), in basis-index bit order.
    pub fn x_mask(&self) -> usize {
        let len = self.word.len();
        self.word
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 1 || s == 2)
            .fold(0, |m, (k, _)| m | (1 << (len - 1 - k)))
    }

    /// Nonzero entries of row `row` of the dense matrix: `(column, value)`.
    ///
    /// Pauli strings are signed permutation matrices, so each row has exactly
    /// one nonzero entry.
    pub fn row_entry(&self, row: usize) -> (usize, Complex64) {
        let len = self.word.len();
        let col = row ^ self.x_mask();
        let mut phase = Phase::ONE;
        for (k, &s) in self.word.iter().enumerate() {
            let r = (row >> (len - 1 - k)) & 1;
            phase = phase
                * match (s, r) {
                    (2, 0) => Phase::MINUS_I,
                    (2, _) => Phase::I,
                    (3, 1) => Phase::MINUS_ONE,
                    _ => Phase::ONE,
                };
        }
        (col, phase.to_complex())
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.word {
            f.write_str(["I", "X", "Y", "Z"][s as usize])?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Accepts `IXYZ` letters (either case) or digits `0..3`.
    fn from_str(s: &str) -> Result<Self> {
        let word = s
            .chars()
            .map(|c| match c {
                'I' | 'i' | '0' => Ok(0),
                'X' | 'x' | '1' => Ok(1),
                'Y' | 'y' | '2' => Ok(2),
                'Z' | 'z' | '3' => Ok(3),
                other => Err(Error::InvalidSymbol(other)),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(Self { word })
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A power of `i`: one of `1, i, -1, -i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["1", "i", "-1", "-i"][self.0 as usize])
    }
}

fn check_lengths(a: &PauliString, b: &PauliString) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// Single-qubit product table: `σ_a σ_b = phase · σ_c`.
fn site_product(a: u8, b: u8) -> (Phase, u8) {
    match (a, b) {
        (0, s) | (s, 0) => (Phase::ONE, s),
        (x, y) if x == y => (Phase::ONE, 0),
        // cyclic X -> Y -> Z picks up +i, anticyclic -i
        (x, y) => {
            let c = 6 - x - y;
            if (y + 3 - x) % 3 == 1 {
                (Phase::I, c)
            } else {
                (Phase::MINUS_I, c)
            }
        }
    }
}

/// `σ_A σ_B = phase · σ_C`.
pub fn pauli_product(a: &PauliString, b: &PauliString) -> Result<(Phase, PauliString)> {
    check_lengths(a, b)?;
    let mut phase = Phase::ONE;
    let word = a
        .word
        .iter()
        .zip(&b.word)
        .map(|(&x, &y)| {
            let (p, c) = site_product(x, y);
            phase = phase * p;
            c
        })
        .collect();
    Ok((phase, PauliString { word }))
}

/// True iff the two strings commute: an even number of sites carry
/// distinct non-identity symbols.
pub fn commutes(a: &PauliString, b: &PauliString) -> Result<bool> {
    check_lengths(a, b)?;
    let clashes = a
        .word
        .iter()
        .zip(&b.word)
        .filter(|(&x, &y)| x != 0 && y != 0 && x != y)
        .count();
    Ok(clashes % 2 == 0)
}

/// Sign `s` with `σ_B^T = s · σ_B`; only `Y` is antisymmetric.
pub fn transpose_sign(b: &PauliString) -> f64 {
    if b.word.iter().filter(|&&s| s == 2).count() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}
