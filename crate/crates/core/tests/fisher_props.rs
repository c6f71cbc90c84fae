use proptest::prelude::*;
use qmetro::fisher::gauge_objective;
use qmetro::qubit::{apply_kraus, eigh, identity, kron};
use qmetro::random::{random_hermitian, random_isometry, random_kraus, random_mixed_state, rng, RandomFamily, Rng64};
use qmetro::*;
use rand::Rng;

fn cr(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn expm_i(h: &CMat, t: f64) -> CMat {
    let (vals, vecs) = eigh(h);
    let ph = CMat::from_diagonal(&vals.map(|l| C64::from_polar(1.0, -t * l)));
    &vecs * ph * vecs.adjoint()
}

/// Full-rank two-qubit state.
fn random_density(r: &mut Rng64, d: usize) -> CMat {
    let a = random_hermitian(r, d);
    let m = &a * a.adjoint() + identity(d) * cr(0.05);
    let tr = m.trace();
    m / tr
}

fn richardson(e: f64, dist: impl Fn(f64) -> f64) -> f64 {
    let f = |h: f64| {
        let d = dist(h);
        d * d / (h * h)
    };
    (4.0 * f(e) - f(2.0 * e)) / 3.0
}

fn bloch_density(r: &mut Rng64) -> DensityState {
    bloch_to_density(&random_mixed_state(r)).unwrap()
}

fn random_povm(r: &mut Rng64) -> Povm {
    let m = r.random_range(2..=6);
    let v = random_isometry(r, m, 2);
    let els = (0..m)
        .map(|i| {
            let row = v.row(i).adjoint();
            &row * row.adjoint()
        })
        .collect();
    Povm::new(els).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn two_qubit_qfi_matches_bures(seed in any::<u64>()) {
        let mut r = rng(seed);
        let sigma = random_density(&mut r, 4);
        let h = random_hermitian(&mut r, 4);
        let delta = random_hermitian(&mut r, 4);
        let delta = &delta - identity(4) * (delta.trace() / cr(4.0));
        let at = |t: f64| {
            let u = expm_i(&h, t);
            &u * (&sigma + &delta * cr(t)) * u.adjoint()
        };
        let i = C64::new(0.0, 1.0);
        let drho = (&h * &sigma - &sigma * &h) * (-i) + &delta;
        let f = qfi_state(&DensityState::new(sigma.clone(), drho.clone()).unwrap()).value;
        // The state bends on the scale of its smallest eigenvalue over ‖∂ρ‖.
        let lam = eigh(&sigma).0[0];
        let speed = qmetro::qubit::op_norm(&drho).max(1.0);
        let fd = richardson(1e-2 * lam / speed, |e| bures_distance(&at(-e), &at(e)));
        prop_assert!((f - fd).abs() <= 1e-5 * f, "qfi {f} vs Bures {fd}");
    }

    #[test]
    fn data_processing(seed in any::<u64>(), env in 1usize..=4) {
        let mut r = rng(seed);
        let s = bloch_density(&mut r);
        let ops = random_kraus(&mut r, env).ops().to_vec();
        let out = DensityState::new(apply_kraus(&ops, s.rho()), apply_kraus(&ops, s.drho())).unwrap();
        prop_assert!(qfi_state(&out).value <= qfi_state(&s).value + 1e-9);
    }

    #[test]
    fn additivity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b) = (bloch_density(&mut r), bloch_density(&mut r));
        let joint = DensityState::new(
            kron(a.rho(), b.rho()),
            kron(a.drho(), b.rho()) + kron(a.rho(), b.drho()),
        )
        .unwrap();
        let sum = qfi_state(&a).value + qfi_state(&b).value;
        prop_assert!((qfi_state(&joint).value - sum).abs() <= 1e-9 * sum.max(1.0));
    }

    #[test]
    fn convexity(seed in any::<u64>(), parts in 2usize..=5) {
        let mut r = rng(seed);
        let w: Vec<f64> = (0..parts).map(|_| r.random::<f64>() + 1e-3).collect();
        let total: f64 = w.iter().sum();
        let states: Vec<DensityState> = (0..parts).map(|_| bloch_density(&mut r)).collect();
        let mut rho = CMat::zeros(2, 2);
        let mut drho = CMat::zeros(2, 2);
        let mut avg = 0.0;
        for (wi, s) in w.iter().zip(&states) {
            let p = wi / total;
            rho += s.rho() * cr(p);
            drho += s.drho() * cr(p);
            avg += p * qfi_state(s).value;
        }
        let mix = qfi_state(&DensityState::new(rho, drho).unwrap()).value;
        prop_assert!(mix <= avg + 1e-9 * avg.max(1.0));
    }

    #[test]
    fn gauge_objective_is_convex(seed in any::<u64>(), env in 1usize..=3) {
        let mut r = rng(seed);
        let ch = RandomFamily::generic(&mut r, env).channel();
        let k = env * env;
        let x1: Vec<f64> = (0..k).map(|_| r.random_range(-3.0..3.0)).collect();
        let x2: Vec<f64> = (0..k).map(|_| r.random_range(-3.0..3.0)).collect();
        let mid: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| 0.5 * (a + b)).collect();
        let f = |x: &[f64]| gauge_objective(&ch, &GaugeMatrix::from_params(x, env)).unwrap();
        let (a, b, m) = (f(&x1), f(&x2), f(&mid));
        prop_assert!(m <= 0.5 * (a + b) + 1e-9 * (a + b).max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn povm_fi_below_qfi(seed in any::<u64>(), pure in any::<bool>()) {
        let mut r = rng(seed);
        let b = if pure { qmetro::random::random_pure_state(&mut r) } else { random_mixed_state(&mut r) };
        let s = bloch_to_density(&b).unwrap();
        let q = qfi_state(&s).value;
        prop_assert!(povm_fi(&s, &random_povm(&mut r)).unwrap() <= q * (1.0 + 1e-9) + 1e-9);
    }

    #[test]
    fn qubit_qfi_formulas_agree(seed in any::<u64>()) {
        let b = random_mixed_state(&mut rng(seed));
        let a = qfi_state(&bloch_to_density(&b).unwrap()).value;
        let c = qfi_bloch(&b).unwrap();
        prop_assert!((a - c).abs() <= 1e-9 * a.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn chain_rule_of_root_qfi(seed in any::<u64>(), e1 in 1usize..=2, e2 in 1usize..=2) {
        let mut r = rng(seed);
        let n = RandomFamily::generic(&mut r, e1).channel();
        let m = RandomFamily::generic(&mut r, e2).channel();
        let fnn = channel_qfi_ancilla(&n).unwrap().value;
        let fm = channel_qfi_ancilla(&m).unwrap().value;
        let fc = channel_qfi_ancilla(&n.then(&m).unwrap()).unwrap().value;
        prop_assert!(fc.sqrt() <= fnn.sqrt() + fm.sqrt() + 1e-6, "{fc} vs {fnn} + {fm}");
    }
}

#[test]
fn composed_family_derivative_is_product_rule() {
    let mut r = rng(3);
    let (a, b) = (RandomFamily::generic(&mut r, 2), RandomFamily::generic(&mut r, 2));
    let comp = a.channel().then(&b.channel()).unwrap();
    let e = 1e-6;
    let rho = random_density(&mut r, 2);
    let at = |t: f64| apply_kraus(&b.kraus_at(t), &apply_kraus(&a.kraus_at(t), &rho));
    let fd = (at(e) - at(-e)) / cr(2.0 * e);
    let (_, d) = comp.apply(&rho, &CMat::zeros(2, 2));
    assert!(qmetro::qubit::frobenius(&(fd - d)) < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    // Rotated depolarizing about a unit axis: inputs orthogonal to the axis reach 4λ².
    #[test]
    fn no_ancilla_qfi_of_rotated_depolarizing(lam in 0.05f64..0.95, seed in any::<u64>()) {
        let mut r = rng(seed);
        let axis = qmetro::random::random_unit_vector(&mut r);
        let ch = rotated_depolarizing(lam, &axis).unwrap();
        let best = channel_qfi_no_ancilla(&ch).unwrap();
        prop_assert!((best - 4.0 * lam * lam).abs() <= 1e-9, "{best} vs {}", 4.0 * lam * lam);
        for _ in 0..20 {
            let psi = random_isometry(&mut r, 2, 1);
            let v = qmetro::fisher::purified_output_qfi(&ch, &(&psi * psi.adjoint())).unwrap();
            prop_assert!(v <= 4.0 * lam * lam + 1e-9);
        }
    }
}
