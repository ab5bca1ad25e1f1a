use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{ChannelRep, ChoiState, KrausChannel, CHANNEL_TOL};
use crate::error::{Error, Result};
use crate::pauli::{check_qubits, commutes, DenseOperator, PauliString};

pub fn identity_channel(n: usize) -> Result<KrausChannel> {
    KrausChannel::new(vec![DenseOperator::identity(n)?])
}

pub fn unitary_channel(u: DenseOperator) -> Result<KrausChannel> {
    KrausChannel::new(vec![u])
}

/// `N(ρ) = Σ γ_C σ_C ρ σ_C`.
pub fn make_pauli_channel(rates: &BTreeMap<PauliString, f64>) -> Result<KrausChannel> {
    let n = rates
        .keys()
        .next()
        .map(|p| p.len())
        .ok_or_else(|| Error::InvalidChannel("empty Pauli rate table".into()))?;
    if rates.keys().any(|p| p.len() != n) {
        return Err(Error::InvalidChannel("Pauli rates of mixed length".into()));
    }
    if let Some((p, g)) = rates.iter().find(|(_, &g)| g < 0.0 || !g.is_finite()) {
        return Err(Error::InvalidChannel(format!("rate {g} for {p} is negative")));
    }
    let total: f64 = rates.values().sum();
    if (total - 1.0).abs() > CHANNEL_TOL {
        return Err(Error::InvalidChannel(format!("rates sum to {total}, not 1")));
    }
    let ops = rates
        .iter()
        .filter(|(_, &g)| g > 0.0)
        .map(|(p, &g)| Ok(DenseOperator::from_pauli(p)?.scale(Complex64::new(g.sqrt(), 0.0))))
        .collect::<Result<Vec<_>>>()?;
    KrausChannel::new(ops)
}

/// Pauli eigenvalues `λ_B = Σ_C ±γ_C`, `+` when `σ_B, σ_C` commute.
pub fn pauli_channel_eigenvalues(rates: &BTreeMap<PauliString, f64>, n: usize) -> Result<Vec<f64>> {
    PauliString::all(n)
        .map(|b| {
            rates.iter().try_fold(0.0, |acc, (c, &g)| {
                Ok(acc + if commutes(&b, c)? { g } else { -g })
            })
        })
        .collect()
}

/// `ρ ↦ (1−p)ρ + p·I/2ⁿ`, expressed as a Pauli channel.
pub fn depolarizing(n: usize, p: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("depolarizing rate {p}")));
    }
    check_qubits(2 * n)?;
    let share = p / (1u64 << (2 * n)) as f64;
    let rates = PauliString::all(n)
        .map(|c| {
            let g = if c.is_identity() { 1.0 - p + share } else { share };
            (c, g)
        })
        .collect();
    make_pauli_channel(&rates)
}

/// Channel with Choi state `(I + σ_A)/4ⁿ` for a `2n`-qubit string whose output half is nontrivial.
pub fn make_sparse_choi_channel(a: &PauliString) -> Result<ChannelRep> {
    if !a.len().is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "string {a} has odd length, expected 2n"
        )));
    }
    let n = a.len() / 2;
    let (_, out) = a.split_at(n);
    if out.is_identity() {
        return Err(Error::InvalidArgument(format!(
            "output half of {a} is the identity; the map would not be trace preserving"
        )));
    }
    let d2 = (1u64 << (2 * n)) as f64;
    let m = DenseOperator::identity(2 * n)?
        .add(&DenseOperator::from_pauli(a)?)?
        .scale(Complex64::new(1.0 / d2, 0.0));
    Ok(ChannelRep::Choi(ChoiState::from_matrix_unchecked(m)?))
}

/// Random CPTP map of Kraus rank `rank`: a Ginibre `(2ⁿ·rank) × 2ⁿ` matrix with
/// orthonormalized columns, cut into `rank` blocks.
pub fn random_channel<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> Result<KrausChannel> {
    check_qubits(2 * n)?;
    if rank == 0 {
        return Err(Error::InvalidArgument("Kraus rank must be positive".into()));
    }
    let d = 1usize << n;
    let g = DMatrix::<Complex64>::from_fn(d * rank, d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let q = g.qr().q();
    let ops = (0..rank)
        .map(|k| DenseOperator::new(q.rows(k * d, d).into_owned()))
        .collect::<Result<Vec<_>>>()?;
    KrausChannel::new(ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{choi_to_ptm, exact_ptm, PTM_ZERO_TOL};

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn trivial_pauli_channel_is_identity() {
        let rates = BTreeMap::from([(p("II"), 1.0)]);
        let r = exact_ptm(&make_pauli_channel(&rates).unwrap()).unwrap();
        for a in 0..16 {
            for b in 0..16 {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((r.at(a, b) - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn pauli_eigenvalues_match_ptm() {
        let cases = [
            BTreeMap::from([(p("I"), 0.25), (p("X"), 0.25), (p("Y"), 0.25), (p("Z"), 0.25)]),
            BTreeMap::from([(p("I"), 0.5), (p("Z"), 0.5)]),
            BTreeMap::from([(p("II"), 0.7), (p("XZ"), 0.2), (p("YY"), 0.1)]),
        ];
        for rates in cases {
            let n = rates.keys().next().unwrap().len();
            let r = exact_ptm(&make_pauli_channel(&rates).unwrap()).unwrap();
            let lam = pauli_channel_eigenvalues(&rates, n).unwrap();
            for (i, l) in lam.iter().enumerate() {
                assert!((r.at(i, i) - l).abs() < 1e-13);
            }
            assert!(r.nonzeros(PTM_ZERO_TOL).iter().all(|(a, b, _)| a == b));
        }
        let z_dephase = BTreeMap::from([(p("I"), 0.5), (p("Z"), 0.5)]);
        assert_eq!(
            pauli_channel_eigenvalues(&z_dephase, 1).unwrap(),
            vec![1.0, 0.0, 0.0, 1.0]
        );
    }

    #[test]
    fn invalid_rates_rejected() {
        assert!(make_pauli_channel(&BTreeMap::from([(p("I"), 0.5)])).is_err());
        assert!(make_pauli_channel(&BTreeMap::from([(p("I"), 1.5), (p("X"), -0.5)])).is_err());
    }

    #[test]
    fn depolarizing_ptm() {
        let r = exact_ptm(&depolarizing(1, 0.3).unwrap()).unwrap();
        for (i, want) in [1.0, 0.7, 0.7, 0.7].iter().enumerate() {
            assert!((r.at(i, i) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn sparse_choi_examples() {
        let check = |s: &str, want: &[(&str, &str, f64)]| {
            let ch = make_sparse_choi_channel(&p(s)).unwrap();
            let nz = choi_to_ptm(&ch.to_choi().unwrap()).nonzeros(PTM_ZERO_TOL);
            assert_eq!(nz.len(), want.len(), "{s}");
            for ((a, b, v), (wa, wb, wv)) in nz.iter().zip(want) {
                assert_eq!((a.to_string().as_str(), b.to_string().as_str()), (*wa, *wb));
                assert!((v - wv).abs() < 1e-14);
            }
        };
        check("ZZ", &[("I", "I", 1.0), ("Z", "Z", 1.0)]);
        check("YY", &[("I", "I", 1.0), ("Y", "Y", -1.0)]);
        check("IZ", &[("I", "I", 1.0), ("Z", "I", 1.0)]);
        assert!(make_sparse_choi_channel(&p("ZI")).is_err());
        assert!(make_sparse_choi_channel(&p("ZIX")).is_err());
    }
}
