mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

use ptmlab_core::channel::{exact_ptm, identity_channel, random_channel, ChannelRep};
use ptmlab_core::learner::{
    learn_ptm, shadow_pauli_estimates, threshold_sparse_ptm, LearnerBudget, PTMEstimateJson,
};
use ptmlab_core::pauli::{DenseOperator, PauliString};
use ptmlab_core::sim::{ChoiOracle, DensityMatrix, RngStream};

fn hoeffding(eps: f64, delta: f64, m: usize, s: usize) -> (u64, u64) {
    let n1 = (32.0 * (4.0 * m as f64 / delta).ln() / eps.powi(4)).ceil() as u64;
    let n2 = if s == 0 { 0 } else { (8.0 * (4.0 * s as f64 / delta).ln() / eps.powi(2)).ceil() as u64 };
    (n1, n2)
}

fn ensemble_state(p: &PauliString, eps: f64) -> DensityMatrix {
    let q = (1u64 << p.len()) as f64;
    let m = DenseOperator::identity(p.len()).unwrap()
        .add(&DenseOperator::from_pauli(p).unwrap().scale(Complex64::new(3.0 * eps, 0.0))).unwrap()
        .scale(Complex64::new(1.0 / q, 0.0));
    DensityMatrix::new(m).unwrap()
}

#[test]
fn maximally_mixed_gives_exact_zeros() {
    let oracle = ChoiOracle::new(DensityMatrix::maximally_mixed(2).unwrap()).unwrap();
    let targets: Vec<PauliString> = (1..16).map(|i| PauliString::from_index(i, 2)).collect();
    let est = shadow_pauli_estimates(&oracle, &targets, 0.2, 0.1, &RngStream::new(4)).unwrap();
    assert!(est.values.iter().all(|&v| v == 0.0));
}

#[test]
fn identity_channel_zz_is_one() {
    let rep = ChannelRep::Kraus(identity_channel(1).unwrap());
    let oracle = ChoiOracle::from_channel(&rep).unwrap();
    let est = shadow_pauli_estimates(&oracle, &["ZZ".parse().unwrap()], 0.2, 0.1, &RngStream::new(8)).unwrap();
    assert!((est.values[0] - 1.0).abs() <= 0.2);
}

#[test]
fn budget_shrinks_as_accuracy_loosens() {
    let rep = ChannelRep::Kraus(identity_channel(1).unwrap());
    let mut last = u64::MAX;
    for eps in [0.05, 0.1, 0.15, 0.2, 0.3] {
        let oracle = ChoiOracle::from_channel(&rep).unwrap();
        let est = learn_ptm(&oracle, eps, 0.1, &RngStream::new(2)).unwrap();
        assert!(est.copies <= last);
        last = est.copies;
        assert!(LearnerBudget::phase1_rounds(eps, 0.1, 15).unwrap() >= LearnerBudget::phase1_rounds(eps + 0.01, 0.1, 15).unwrap());
    }
}

#[test]
fn learner_is_schedule_independent() {
    let mut rng = seeded(12);
    let rep = ChannelRep::Kraus(random_channel(2, 2, &mut rng).unwrap());
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
            learn_ptm(&ChoiOracle::from_channel(&rep).unwrap(), 0.25, 0.1, &RngStream::new(31)).unwrap()
        })
    };
    assert_eq!(run(1), run(3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ensemble_member_estimate(p in nontrivial_string(2), seed in any::<u64>()) {
        let oracle = ChoiOracle::new(ensemble_state(&p, 0.25)).unwrap();
        let est = shadow_pauli_estimates(&oracle, &[p], 0.2, 0.1, &RngStream::new(seed)).unwrap();
        prop_assert!((est.values[0] - 0.75).abs() <= 0.2);
    }

    #[test]
    fn accounting_matches_formulas(n in 1usize..=2, seed in any::<u64>(), eps in 0.15f64..0.33) {
        let mut rng = seeded(seed);
        let rep = ChannelRep::Kraus(random_channel(n, rng.random_range(1..4), &mut rng).unwrap());
        let oracle = ChoiOracle::from_channel(&rep).unwrap();
        let est = learn_ptm(&oracle, eps, 0.1, &RngStream::new(seed)).unwrap();
        let m = (1usize << (4 * n)) - 1;
        let (n1, n2) = hoeffding(eps, 0.1, m, est.budget.selected);
        prop_assert_eq!(est.budget.n1, n1);
        prop_assert_eq!(oracle.copies_used(), 2 * n1 + est.budget.selected as u64 * n2);
        prop_assert_eq!(est.copies, oracle.copies_used());
        prop_assert_eq!(est.budget.copies(), est.copies as u128);
        prop_assert_eq!(est.ptm.at(0, 0), 1.0);
    }

    #[test]
    fn estimates_within_epsilon(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let rep = ChannelRep::Kraus(random_channel(1, 2, &mut rng).unwrap());
        let exact = exact_ptm(&rep.to_kraus().unwrap()).unwrap();
        let est = learn_ptm(&ChoiOracle::from_channel(&rep).unwrap(), 0.2, 0.05, &RngStream::new(seed)).unwrap();
        prop_assert!(est.ptm.max_abs_diff(&exact) <= 0.2);
        prop_assert!(est.ptm.matrix().iter().all(|v| v.abs() <= 1.2));
    }

    #[test]
    fn estimate_json_round_trips(seed in any::<u64>()) {
        let rep = ChannelRep::Kraus(identity_channel(1).unwrap());
        let report = threshold_sparse_ptm(&ChoiOracle::from_channel(&rep).unwrap(), 0.3, 0.1, &RngStream::new(seed)).unwrap();
        prop_assert_eq!(report.entries.len(), 4);
        let json = serde_json::to_string(&PTMEstimateJson::from(&report)).unwrap();
        let back: PTMEstimateJson = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back.to_ptm().unwrap(), report_ptm(&report));
    }
}

fn report_ptm(r: &ptmlab_core::learner::SparsePTMReport) -> ptmlab_core::channel::PTMatrix {
    let mut p = ptmlab_core::channel::PTMatrix::zeros(r.n).unwrap();
    for (a, b, v) in &r.entries {
        p.set(a.index(), b.index(), *v);
    }
    p
}
