use nalgebra::Vector3;
use proptest::prelude::*;
use qmetro::qubit::frobenius;
use qmetro::random::{random_dephasing_family, random_hermitian, random_kraus, random_unitary, rng, RandomFamily};
use qmetro::*;

fn sandwich(ks: &KrausSet, u: &CMat, v: &CMat) -> KrausSet {
    KrausSet::new(ks.ops().iter().map(|k| u * k * v).collect()).unwrap()
}

fn family(seed: u64, kind: u8) -> RandomFamily {
    let mut r = rng(seed);
    match kind % 4 {
        0 => RandomFamily::generic(&mut r, 1),
        1 => RandomFamily::dephasing_class(&mut r),
        k => RandomFamily::generic(&mut r, k as usize + (seed % 2) as usize),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn classification_ignores_unitary_frames(seed in any::<u64>(), kind in any::<u8>()) {
        let ks = family(seed, kind).channel().kraus_set();
        let mut r = rng(seed ^ 0x5a5a);
        let (u, v) = (random_unitary(&mut r, 2), random_unitary(&mut r, 2));
        let a = classify(&ptm_from_kraus(&ks).unwrap(), CLASSIFY_TOL).unwrap();
        let b = classify(&ptm_from_kraus(&sandwich(&ks, &u, &v)).unwrap(), CLASSIFY_TOL).unwrap();
        prop_assert_eq!(a.tag, b.tag);
        for (x, y) in a.singular_values.iter().zip(&b.singular_values) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn hnks_implies_rgnks(seed in any::<u64>()) {
        let fam = random_dephasing_family(&mut rng(seed));
        let ch = dephasing_channel(&fam).unwrap();
        if hnks_check(&ch, 1e-9).holds {
            prop_assert!(rgnks_check(&fam, 1e-12));
        }
    }

    #[test]
    fn solve_h_annihilates_on_non_unital_channels(seed in any::<u64>(), env in 2usize..=4) {
        let mut r = rng(seed);
        let ks = random_kraus(&mut r, env);
        prop_assume!(ptm_from_kraus(&ks).unwrap().t.norm() > 1e-6);
        let g = random_hermitian(&mut r, 2);
        let h = HermitianOp::new(&g / C64::new(frobenius(&g), 0.0)).unwrap();
        let sol = solve_h_annihilating(&ks, &h).unwrap();
        let ops = ks.ops();
        let mut acc = h.matrix().clone();
        for (a, ka) in ops.iter().enumerate() {
            for (b, kb) in ops.iter().enumerate() {
                acc += ka.adjoint() * kb * sol.matrix()[(a, b)];
            }
        }
        prop_assert!(frobenius(&acc) <= 1e-9, "residual {}", frobenius(&acc));
    }

    #[test]
    fn canonical_form_preserves_the_channel(seed in any::<u64>(), env in 1usize..=4) {
        let ks = random_kraus(&mut rng(seed), env);
        let form = canonical_pauli_form(&ks).unwrap();
        prop_assert!(form.m00 >= 0.0);
        let (vals, _) = qmetro::qubit::eigh(&CMat::from_fn(3, 3, |i, j| form.frak_m[(i, j)]));
        prop_assert!(vals[0] >= -1e-9);
        let rebuilt = choi_from_kraus(&KrausSet::new(form.kraus()).unwrap());
        prop_assert!(frobenius(&(rebuilt - choi_from_kraus(&ks))) <= 1e-9);
    }

    #[test]
    fn hnks_only_for_unitary_or_dephasing(seed in any::<u64>(), kind in any::<u8>()) {
        let ch = family(seed, kind).channel();
        let class = classify(&ch.ptm().unwrap(), CLASSIFY_TOL).unwrap();
        if hnks_check(&ch, 1e-9).holds {
            prop_assert!(class.tag != ChannelTag::StrictlyContractive);
        }
    }
}

#[test]
fn rgnks_without_hnks_counterexample() {
    for p in [0.05, 0.1, 0.3, 0.5] {
        let fam = DephasingFamily::new(p, 0.0, Vector3::x() * p, -Vector3::x() * (1.0 - p)).unwrap();
        assert!(rgnks_check(&fam, 1e-12));
        assert!(!hnks_check(&dephasing_channel(&fam).unwrap(), 1e-9).holds);
    }
}
