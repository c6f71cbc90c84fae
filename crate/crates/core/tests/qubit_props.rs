use proptest::prelude::*;
use qmetro::qubit::frobenius;
use qmetro::random::{random_kraus, random_mixed_state, random_pure_state, random_unitary, rng};
use qmetro::*;

fn remix(ks: &KrausSet, u: &CMat) -> KrausSet {
    let ops = ks.ops();
    let mixed = (0..ops.len())
        .map(|i| ops.iter().enumerate().fold(CMat::zeros(2, 2), |acc, (j, k)| acc + k * u[(i, j)]))
        .collect();
    KrausSet::new(mixed).unwrap()
}

fn ptm_distance(a: &PauliTransferMap, b: &PauliTransferMap) -> f64 {
    (a.t - b.t).norm() + (a.mat - b.mat).norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn bloch_density_round_trip(seed in any::<u64>(), pure in any::<bool>()) {
        let mut r = rng(seed);
        let b = if pure { random_pure_state(&mut r) } else { random_mixed_state(&mut r) };
        let back = density_to_bloch(&bloch_to_density(&b).unwrap()).unwrap();
        prop_assert!((back.v - b.v).norm() <= 1e-14);
        prop_assert!((back.dv - b.dv).norm() <= 1e-14 * b.dv.norm().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ptm_is_kraus_gauge_invariant(seed in any::<u64>(), env in 1usize..=4) {
        let mut r = rng(seed);
        let ks = random_kraus(&mut r, env);
        let u = random_unitary(&mut r, env);
        let a = ptm_from_kraus(&ks).unwrap();
        let b = ptm_from_kraus(&remix(&ks, &u)).unwrap();
        prop_assert!(ptm_distance(&a, &b) <= 1e-12);
    }

    #[test]
    fn valid_kraus_choi_is_cptp(seed in any::<u64>(), env in 1usize..=4) {
        let mut r = rng(seed);
        let rep = validate_cptp(&choi_from_kraus(&random_kraus(&mut r, env))).unwrap();
        prop_assert!(rep.is_cp && rep.is_tp);
    }

    #[test]
    fn ptm_composition_is_affine_product(seed in any::<u64>(), e1 in 1usize..=4, e2 in 1usize..=4) {
        let mut r = rng(seed);
        let (k1, k2) = (random_kraus(&mut r, e1), random_kraus(&mut r, e2));
        let (p1, p2) = (ptm_from_kraus(&k1).unwrap(), ptm_from_kraus(&k2).unwrap());
        let composed = ptm_from_kraus(&k1.then(&k2).unwrap()).unwrap();
        let expected = PauliTransferMap::new(p2.t + p2.mat * p1.t, p2.mat * p1.mat);
        prop_assert!(ptm_distance(&composed, &expected) <= 1e-12);
    }

    #[test]
    fn kraus_choi_ptm_agree(seed in any::<u64>(), env in 1usize..=4) {
        let mut r = rng(seed);
        let ks = random_kraus(&mut r, env);
        let ptm = ptm_from_kraus(&ks).unwrap();
        prop_assert!(frobenius(&(choi_from_kraus(&ks) - choi_from_ptm(&ptm))) <= 1e-12);
        let rebuilt = ptm_from_kraus(&kraus_from_choi(&choi_from_kraus(&ks)).unwrap()).unwrap();
        prop_assert!(ptm_distance(&rebuilt, &ptm) <= 1e-10);
    }
}
