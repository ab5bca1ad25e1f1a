mod common;

use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use ptmlab_core::channel::validate;
use ptmlab_core::separation::{
    big_delta_functional, delta_closed_form, delta_functional, delta_functional_dense,
    ensemble_channel, ensemble_choi, ensemble_entropy, mutual_info_floor, random_probe,
    random_pure_state, DeltaProbe, EnsembleVariant, HardEnsemble,
};
use ptmlab_core::sim::DensityMatrix;

const VARIANTS: [EnsembleVariant; 2] = [EnsembleVariant::General, EnsembleVariant::DoublyStochastic];

/// Δ term by term on the full `aux ⊗ in ⊗ out` space.
fn big_delta_dense(ens: &HardEnsemble, probe: &DeltaProbe) -> f64 {
    let (n, aux) = (ens.n, probe.aux);
    let (da, d) = (1usize << aux, 1usize << n);
    let rho = probe.rho.operator().matrix();
    // partial transpose on the input factor of ρ (aux ⊗ in)
    let pt = DMatrix::from_fn(da * d, da * d, |r, cidx| {
        let (a, i) = (r / d, r % d);
        let (b, j) = (cidx / d, cidx % d);
        rho[(a * d + j, b * d + i)]
    });
    let left = pt.kronecker(&DMatrix::<Complex64>::identity(d, d));
    let phi = nalgebra::DVector::from_vec(probe.phi.clone());
    let rho_aux = probe.rho.operator().trace_back(n).unwrap().into_matrix();
    let den = (phi.adjoint() * rho_aux.kronecker(&DMatrix::<Complex64>::identity(d, d)) * &phi)[(0, 0)].re;
    let pos = ens.positives();
    let sum: f64 = pos
        .iter()
        .map(|p| {
            let full = &left * DMatrix::<Complex64>::identity(da, da).kronecker(&kron_pauli(&p.string));
            // trace out the middle (input) factor
            let reduced = DMatrix::from_fn(da * d, da * d, |r, cidx| {
                let (a, o) = (r / d, r % d);
                let (b, o2) = (cidx / d, cidx % d);
                (0..d).map(|i| full[((a * d + i) * d + o, (b * d + i) * d + o2)]).sum::<Complex64>()
            });
            let v = (phi.adjoint() * reduced * &phi)[(0, 0)].re;
            v * v
        })
        .sum();
    sum / pos.len() as f64 / (den * den)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn delta_fast_form_matches_sum(n in 1usize..=2, seed in any::<u64>()) {
        let phi = random_pure_state(2 * n, &mut seeded(seed));
        for v in VARIANTS {
            let ens = HardEnsemble::new(n, v, 0.1).unwrap();
            let fast = delta_functional(&ens, &phi).unwrap();
            prop_assert!((fast - delta_functional_dense(&ens, &phi).unwrap()).abs() < 1e-12);
            prop_assert!(fast <= delta_closed_form(n, v) + 1e-9);
        }
    }

    #[test]
    fn big_delta_matches_dense_oracle(aux in 0usize..=2, seed in any::<u64>()) {
        let probe = random_probe(1, aux, &mut seeded(seed)).unwrap();
        for v in VARIANTS {
            let ens = HardEnsemble::new(1, v, 0.1).unwrap();
            let fast = big_delta_functional(&ens, &probe).unwrap();
            let dense = big_delta_dense(&ens, &probe);
            prop_assert!((fast - dense).abs() <= 1e-10 * dense.max(1.0));
        }
    }

    #[test]
    fn big_delta_respects_bounds(n in 1usize..=2, aux in 0usize..=2, seed in any::<u64>()) {
        let probe = random_probe(n, aux, &mut seeded(seed)).unwrap();
        let d = (1u64 << n) as f64;
        let g = big_delta_functional(&HardEnsemble::new(n, EnsembleVariant::General, 0.1).unwrap(), &probe).unwrap();
        let s = big_delta_functional(&HardEnsemble::new(n, EnsembleVariant::DoublyStochastic, 0.1).unwrap(), &probe).unwrap();
        prop_assert!(g >= 0.0 && g <= 1.0 / (d * d - 1.0) + 1e-9);
        prop_assert!(s >= 0.0 && s <= 1.0 / ((d - 1.0) * (d - 1.0)) + 1e-9);
    }

    #[test]
    fn members_pair_and_validate(n in 1usize..=2, v in 0usize..2, pick in any::<prop::sample::Index>(), eps in 0.0f64..0.333) {
        let ens = HardEnsemble::new(n, VARIANTS[v], eps).unwrap();
        let half = ens.len() / 2;
        let i = pick.index(half);
        prop_assert_eq!(&ens.members[i].string, &ens.members[i + half].string);
        prop_assert_eq!(ens.members[i].sign, -ens.members[i + half].sign);
        let r = validate(&ensemble_channel(&ens.members[i + half], eps).unwrap()).unwrap();
        prop_assert!(r.cp && r.tp);
        if VARIANTS[v] == EnsembleVariant::DoublyStochastic {
            prop_assert!(r.unital && r.ptm_sparsity <= 2);
        }
    }

    #[test]
    fn entropy_matches_spectrum(n in 1usize..=2, eps in 0.0f64..0.333, pick in any::<prop::sample::Index>()) {
        let ens = HardEnsemble::new(n, EnsembleVariant::General, eps).unwrap();
        let m = &ens.members[pick.index(ens.len())];
        let dense = DensityMatrix::new(ensemble_choi(m, eps).unwrap().into_matrix()).unwrap().entropy().unwrap();
        prop_assert!((ensemble_entropy(n, eps).unwrap() - dense).abs() <= 1e-10);
    }

    #[test]
    fn information_floor_is_linear(n in 1usize..=3, eps in 0.0f64..0.33, t in 1u64..10_000) {
        let one = mutual_info_floor(n, eps, 1).unwrap();
        let many = mutual_info_floor(n, eps, t).unwrap();
        prop_assert!(one >= 0.0);
        prop_assert!((many - t as f64 * one).abs() <= 1e-9 * many.max(1.0));
    }
}
