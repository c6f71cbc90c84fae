//! Seeded random channels, states and controls for property tests and sweeps.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::{DephasingFamily, KrausPair, OneParamChannel};
use crate::qubit::{cr, eigh, identity, pauli, ptm_from_kraus, BlochState, CMat, KrausSet, PauliTransferMap, C64};

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gauss<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn ginibre<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| C64::new(gauss(rng), gauss(rng)))
}

/// Haar-random isometry (rows ≥ cols) from the QR factor of a Gaussian matrix.
pub fn random_isometry<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    let qr = ginibre(rng, rows, cols).qr();
    let (q, r) = (qr.q(), qr.r());
    let mut out = q.clone();
    for j in 0..cols {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / cr(d.norm()) } else { cr(1.0) };
        for i in 0..rows {
            out[(i, j)] = q[(i, j)] * phase;
        }
    }
    out
}

pub fn random_unitary<R: Rng>(rng: &mut R, d: usize) -> CMat {
    random_isometry(rng, d, d)
}

/// Hermitian matrix with independent Gaussian entries.
pub fn random_hermitian<R: Rng>(rng: &mut R, d: usize) -> CMat {
    let g = ginibre(rng, d, d);
    (&g + g.adjoint()) * cr(0.5)
}

pub fn random_unit_vector<R: Rng>(rng: &mut R) -> Vector3<f64> {
    loop {
        let v = Vector3::from_fn(|_, _| gauss(rng));
        if v.norm() > 1e-9 {
            return v.normalize();
        }
    }
}

/// Uniform in the ball of the given radius.
pub fn random_bloch<R: Rng>(rng: &mut R, radius: f64) -> Vector3<f64> {
    random_unit_vector(rng) * radius * rng.random::<f64>().cbrt()
}

/// Uniform on the Bloch sphere (pure states), derivative tangent to the sphere.
pub fn random_pure_state<R: Rng>(rng: &mut R) -> BlochState {
    let v = random_unit_vector(rng);
    let w = Vector3::from_fn(|_, _| gauss(rng));
    BlochState { v, dv: w - v * v.dot(&w) }
}

/// Mixed state with a generic derivative, ‖v‖ ≤ 0.99.
pub fn random_mixed_state<R: Rng>(rng: &mut R) -> BlochState {
    BlochState { v: random_bloch(rng, 0.99), dv: Vector3::from_fn(|_, _| gauss(rng)) }
}

/// Kraus set of a random Stinespring dilation with the given environment size.
pub fn random_kraus<R: Rng>(rng: &mut R, env: usize) -> KrausSet {
    let v = random_isometry(rng, 2 * env, 2);
    KrausSet::new(split_isometry(&v, env)).expect("isometry blocks are trace preserving")
}

pub fn random_channel_ptm<R: Rng>(rng: &mut R, env: usize) -> PauliTransferMap {
    ptm_from_kraus(&random_kraus(rng, env)).expect("qubit channel")
}

fn split_isometry(v: &CMat, env: usize) -> Vec<CMat> {
    (0..env).map(|a| v.rows(2 * a, 2).into_owned()).collect()
}

/// Unitary control.
pub fn random_unitary_control<R: Rng>(rng: &mut R) -> PauliTransferMap {
    PauliTransferMap::from_unitary(&random_unitary(rng, 2)).expect("unitary")
}

/// Unital control: a random mixture of two unitaries.
pub fn random_unital_control<R: Rng>(rng: &mut R) -> PauliTransferMap {
    let w: f64 = rng.random();
    let u1 = random_unitary(rng, 2) * cr(w.sqrt());
    let u2 = random_unitary(rng, 2) * cr((1.0 - w).sqrt());
    ptm_from_kraus(&KrausSet::new(vec![u1, u2]).expect("mixture")).expect("qubit channel")
}

/// Arbitrary CPTP control with a two-level environment.
pub fn random_cptp_control<R: Rng>(rng: &mut R) -> PauliTransferMap {
    random_channel_ptm(rng, 2)
}

pub fn random_dephasing_family<R: Rng>(rng: &mut R) -> DephasingFamily {
    let p = 0.02 + 0.48 * rng.random::<f64>();
    let g0 = Vector3::from_fn(|_, _| gauss(rng));
    let g1 = Vector3::from_fn(|_, _| gauss(rng));
    DephasingFamily::new(p, gauss(rng), g0, g1).expect("p in range")
}

/// A channel family with exact θ dependence: K_a(θ) is the a-th 2×2 block
/// of e^{−iθG}·V for an isometry V into C^env ⊗ C².
#[derive(Debug, Clone, PartialEq)]
pub struct RandomFamily {
    pub iso: CMat,
    pub generator: CMat,
    pub env: usize,
}

impl RandomFamily {
    /// Generic family; env = 1 gives a unitary family.
    pub fn generic<R: Rng>(rng: &mut R, env: usize) -> Self {
        let iso = random_isometry(rng, 2 * env, 2);
        Self { iso, generator: random_hermitian(rng, 2 * env), env }
    }

    /// Family whose θ = 0 member is U∘dephasing∘W for random unitaries.
    pub fn dephasing_class<R: Rng>(rng: &mut R) -> Self {
        let p = 0.05 + 0.45 * rng.random::<f64>();
        let (u, w) = (random_unitary(rng, 2), random_unitary(rng, 2));
        let k0 = &u * &w * cr((1.0 - p).sqrt());
        let k1 = &u * pauli(3) * &w * cr(p.sqrt());
        let mut iso = CMat::zeros(4, 2);
        iso.rows_mut(0, 2).copy_from(&k0);
        iso.rows_mut(2, 2).copy_from(&k1);
        Self { iso, generator: random_hermitian(rng, 4), env: 2 }
    }

    pub fn kraus_at(&self, theta: f64) -> Vec<CMat> {
        let (vals, vecs) = eigh(&self.generator);
        let phases = CMat::from_diagonal(&vals.map(|l| C64::from_polar(1.0, -theta * l)));
        let v = &vecs * phases * vecs.adjoint() * &self.iso;
        split_isometry(&v, self.env)
    }

    pub fn channel(&self) -> OneParamChannel {
        let dv = &self.generator * &self.iso * C64::new(0.0, -1.0);
        let ops = split_isometry(&self.iso, self.env);
        let derivs = split_isometry(&dv, self.env);
        OneParamChannel::new(ops.into_iter().zip(derivs).map(|(op, deriv)| KrausPair { op, deriv }).collect())
            .expect("isometry family is trace preserving")
    }

    /// (E_θ ⊗ 𝟙)(ρ) for a two-qubit input.
    pub fn apply_with_ancilla(&self, theta: f64, rho: &CMat) -> CMat {
        let id = identity(2);
        let ops: Vec<CMat> = self.kraus_at(theta).iter().map(|k| k.kronecker(&id)).collect();
        crate::qubit::apply_kraus(&ops, rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::frobenius;

    #[test]
    fn isometry_is_isometric() {
        let mut r = rng(7);
        let v = random_isometry(&mut r, 8, 2);
        assert!(frobenius(&(v.adjoint() * &v - identity(2))) < 1e-12);
    }

    #[test]
    fn family_derivative_matches_finite_difference() {
        let mut r = rng(11);
        let fam = RandomFamily::generic(&mut r, 3);
        let ch = fam.channel();
        let h = 1e-6;
        let (kp, km) = (fam.kraus_at(h), fam.kraus_at(-h));
        for (i, pair) in ch.pairs().iter().enumerate() {
            let fd = (&kp[i] - &km[i]) * cr(0.5 / h);
            assert!(frobenius(&(fd - &pair.deriv)) < 1e-8);
        }
    }
}
