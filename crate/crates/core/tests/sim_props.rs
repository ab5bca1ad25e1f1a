mod common;

use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

use ptmlab_core::pauli::PauliString;
use ptmlab_core::sim::{
    bell_character, bell_distribution, bell_histogram, bell_sample, BellLabel, BellOutcomeRecord, ChoiOracle,
    DensityMatrix, RngStream, BELL_SIGNS,
};
use ptmlab_core::pauli::DenseOperator;

fn random_state(n: usize, seed: u64) -> DensityMatrix {
    let mut rng = seeded(seed);
    let d = 1usize << n;
    let g = DMatrix::from_fn(d, d, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix::new(DenseOperator::new(m / tr).unwrap()).unwrap()
}

/// Bell vectors in label order Φ⁺, Ψ⁺, Φ⁻, Ψ⁻.
fn bell_vectors() -> Vec<Vec<Complex64>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    vec![
        vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)],
        vec![c(0.0, 0.0), c(h, 0.0), c(h, 0.0), c(0.0, 0.0)],
        vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-h, 0.0)],
        vec![c(0.0, 0.0), c(h, 0.0), c(-h, 0.0), c(0.0, 0.0)],
    ]
}

#[test]
fn sign_table_matches_dense_eigenvalues() {
    let vecs = bell_vectors();
    for a in 1..=3u8 {
        let op = pauli_2x2(a).kronecker(&pauli_2x2(a));
        let mut plus = 0;
        for (b, v) in vecs.iter().enumerate() {
            let v = nalgebra::DVector::from_vec(v.clone());
            let image = &op * &v;
            let want = &v * c(BELL_SIGNS[a as usize][b], 0.0);
            assert!((image - want).norm() < 1e-14, "a = {a}, b = {b}");
            if BELL_SIGNS[a as usize][b] > 0.0 {
                plus += 1;
            }
        }
        assert_eq!(plus, 2);
    }
    assert_eq!(BellLabel::ALL.len(), 4);
}

#[test]
fn sampling_is_independent_of_thread_count() {
    let rho = random_state(2, 5);
    let stream = RngStream::new(77);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| bell_sample(&rho, 20_000, &stream).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn histogram_and_rounds_share_the_bell_law() {
    let rho = random_state(2, 13);
    let p = bell_distribution(&rho).unwrap();
    let rounds = 40_000u64;
    let hist = bell_histogram(&rho, rounds, &RngStream::new(1)).unwrap();
    let rec = bell_sample(&rho, rounds as usize, &RngStream::new(2)).unwrap();
    let mut counted = vec![0u64; p.len()];
    for r in 0..rec.rounds() {
        counted[rec.outcome_index(r)] += 1;
    }
    assert_eq!(hist.iter().sum::<u64>(), rounds);
    for (k, &pk) in p.iter().enumerate() {
        let sd = (rounds as f64 * pk * (1.0 - pk)).sqrt().max(1.0);
        let mean = rounds as f64 * pk;
        assert!((hist[k] as f64 - mean).abs() <= 5.0 * sd, "histogram outcome {k}");
        assert!((counted[k] as f64 - mean).abs() <= 5.0 * sd, "rounds outcome {k}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn bell_law_is_a_distribution(n in 1usize..=2, seed in any::<u64>()) {
        let p = bell_distribution(&random_state(n, seed)).unwrap();
        prop_assert!(p.iter().all(|&x| x >= -1e-12));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn bell_law_matches_direct_overlap(seed in any::<u64>()) {
        let rho = random_state(1, seed);
        let m = rho.operator().matrix();
        let rr = m.kronecker(m);
        let p = bell_distribution(&rho).unwrap();
        for (b, v) in bell_vectors().into_iter().enumerate() {
            let v = nalgebra::DVector::from_vec(v);
            let direct = (v.adjoint() * &rr * &v)[(0, 0)].re;
            prop_assert!((direct - p[b]).abs() < 1e-12);
        }
    }

    #[test]
    fn character_mean_is_squared_expectation(n in 1usize..=2, seed in any::<u64>(), idx in 1usize..16) {
        let rho = random_state(n, seed);
        let p = PauliString::from_index(idx % (1 << (2 * n)), n);
        let law = bell_distribution(&rho).unwrap();
        let mean: f64 = law.iter().enumerate().map(|(b, pb)| pb * bell_character(&p, b)).sum();
        let e = rho.pauli_expectation(&p).unwrap();
        prop_assert!((mean - e * e).abs() < 1e-12);
    }

    #[test]
    fn same_coordinates_same_samples(seed in any::<u64>(), coord in any::<u64>()) {
        let rho = random_state(1, 3);
        let s = RngStream::new(seed).derive(coord);
        prop_assert_eq!(bell_sample(&rho, 500, &s).unwrap(), bell_sample(&rho, 500, &s).unwrap());
    }

    #[test]
    fn record_dump_round_trips(seed in any::<u64>(), rounds in 0usize..200) {
        let rec = bell_sample(&random_state(2, seed), rounds, &RngStream::new(seed)).unwrap();
        let mut buf = Vec::new();
        rec.write_to(&mut buf).unwrap();
        prop_assert_eq!(BellOutcomeRecord::read_from(buf.as_slice()).unwrap(), rec);
    }

    #[test]
    fn basis_law_matches_projectors(seed in any::<u64>(), basis in proptest::collection::vec(1u8..=3, 2)) {
        let rho = random_state(2, seed);
        let law = ChoiOracle::new(rho.clone()).unwrap().pauli_basis_distribution(&basis).unwrap();
        // p(s) = tr[ρ ⊗_k (I + (−1)^{s_k} σ_k)/2]
        for (s, ps) in law.iter().enumerate() {
            let proj = (0..2).fold(DMatrix::from_element(1, 1, c(1.0, 0.0)), |acc, k| {
                let sign = if (s >> (1 - k)) & 1 == 1 { -1.0 } else { 1.0 };
                let pk = (pauli_2x2(0) + pauli_2x2(basis[k]) * c(sign, 0.0)) * c(0.5, 0.0);
                acc.kronecker(&pk)
            });
            let direct = (rho.operator().matrix() * proj).trace().re;
            prop_assert!((direct - ps).abs() < 1e-12);
        }
    }
}
