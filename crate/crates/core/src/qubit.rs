//! Dense complex linear algebra for qubit (and two-qubit) operators.
//!
//! Conventions: Pauli order is 𝟙, X, Y, Z. Choi matrices use the unnormalized
//! input |Ω⟩ = Σ_j |j⟩|j⟩, so a trace-preserving map on a d-level system has a
//! Choi matrix of trace d, with the output system as the first tensor factor.

use nalgebra::{DMatrix, DVector, Matrix3, Rotation3, Unit, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

/// Absolute tolerance for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Smallest eigenvalue still accepted as positive semidefinite (Choi checks).
pub const PSD_TOL: f64 = 1e-9;
/// Frobenius tolerance on Σ K†K − 𝟙.
pub const TP_TOL: f64 = 1e-10;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub(crate) fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

/// Pauli matrix by index: 0 → 𝟙, 1 → X, 2 → Y, 3 → Z.
pub fn pauli(i: usize) -> CMat {
    let (o, l) = (cr(0.0), cr(1.0));
    match i {
        0 => identity(2),
        1 => CMat::from_row_slice(2, 2, &[o, l, l, o]),
        2 => CMat::from_row_slice(2, 2, &[o, c(0.0, -1.0), c(0.0, 1.0), o]),
        3 => CMat::from_row_slice(2, 2, &[l, o, o, -l]),
        _ => panic!("pauli index {i} out of range"),
    }
}

/// The operator v·σ.
pub fn bloch_op(v: &Vector3<f64>) -> CMat {
    pauli(1) * cr(v[0]) + pauli(2) * cr(v[1]) + pauli(3) * cr(v[2])
}

/// Real coefficients (Tr(Aσ_x), Tr(Aσ_y), Tr(Aσ_z)) of a 2×2 matrix.
pub fn pauli_traces(a: &CMat) -> Vector3<f64> {
    Vector3::new(
        (a * pauli(1)).trace().re,
        (a * pauli(2)).trace().re,
        (a * pauli(3)).trace().re,
    )
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn frobenius(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()) * cr(0.5)
}

pub fn is_hermitian(a: &CMat, tol: f64) -> bool {
    a.is_square() && (a - a.adjoint()).iter().all(|z| z.norm() <= tol)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(a: &CMat) -> (DVector<f64>, CMat) {
    let n = a.nrows();
    let eig = hermitian_part(a).symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = DVector::from_iterator(n, idx.iter().map(|&i| eig.eigenvalues[i]));
    let mut vecs = CMat::zeros(n, n);
    for (k, &i) in idx.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Square root of a positive semidefinite matrix; negative eigenvalues clipped.
pub fn psd_sqrt(a: &CMat) -> CMat {
    let (vals, vecs) = eigh(a);
    let d = CMat::from_diagonal(&vals.map(|x| cr(x.max(0.0).sqrt())));
    &vecs * d * vecs.adjoint()
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Largest singular value.
pub fn op_norm(a: &CMat) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Sum of singular values.
pub fn trace_norm(a: &CMat) -> f64 {
    singular_values(a).iter().sum()
}

/// Σ_i K_i X K_i†.
pub fn apply_kraus(ops: &[CMat], x: &CMat) -> CMat {
    let d = ops.first().map_or(x.nrows(), |k| k.nrows());
    ops.iter().fold(CMat::zeros(d, d), |acc, k| acc + k * x * k.adjoint())
}

/// Partial trace over the first tensor factor of a (d·d)×(d·d) matrix.
pub fn partial_trace_first(m: &CMat, d: usize) -> CMat {
    CMat::from_fn(d, d, |j, k| (0..d).map(|a| m[(a * d + j, a * d + k)]).sum())
}

/// A Hermitian operator on a qubit or on two qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOp {
    mat: CMat,
}

impl HermitianOp {
    pub fn new(mat: CMat) -> Result<Self> {
        let d = mat.nrows();
        if !mat.is_square() || (d != 2 && d != 4) {
            return Err(Error::Validation(format!(
                "Hermitian operator must be 2x2 or 4x4, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if !is_hermitian(&mat, HERMITIAN_TOL) {
            return Err(Error::Validation("matrix is not Hermitian".into()));
        }
        Ok(Self { mat: hermitian_part(&mat) })
    }

    /// ½(c0·𝟙 + c1·X + c2·Y + c3·Z), the inverse of [`pauli_decompose`].
    pub fn from_pauli(coef: [f64; 4]) -> Self {
        let m = (0..4).fold(CMat::zeros(2, 2), |acc, i| acc + pauli(i) * cr(0.5 * coef[i]));
        Self { mat: m }
    }

    /// g·σ for a Pauli coefficient triple g.
    pub fn from_bloch(g: &Vector3<f64>) -> Self {
        Self { mat: bloch_op(g) }
    }

    pub fn identity(d: usize) -> Self {
        Self { mat: identity(d) }
    }

    pub fn zero(d: usize) -> Self {
        Self { mat: CMat::zeros(d, d) }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// Tr(A·B) for Hermitian A, B (always real).
    pub fn inner(&self, other: &HermitianOp) -> f64 {
        (&self.mat * &other.mat).trace().re
    }
}

/// Pauli coefficients c_j = Tr(op·σ_j), so that op = ½ Σ_j c_j σ_j.
pub fn pauli_decompose(op: &HermitianOp) -> Result<[f64; 4]> {
    if op.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: op.dim() });
    }
    let mut out = [0.0; 4];
    for (j, o) in out.iter_mut().enumerate() {
        *o = (op.matrix() * pauli(j)).trace().re;
    }
    Ok(out)
}

/// A qubit state and its parameter derivative as Bloch vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    pub v: Vector3<f64>,
    pub dv: Vector3<f64>,
}

impl BlochState {
    pub fn new(v: Vector3<f64>, dv: Vector3<f64>) -> Result<Self> {
        if v.norm() > 1.0 + 1e-10 {
            return Err(Error::Domain(format!("Bloch vector norm {} exceeds 1", v.norm())));
        }
        Ok(Self { v, dv })
    }

    /// A θ-independent state.
    pub fn fixed(v: Vector3<f64>) -> Result<Self> {
        Self::new(v, Vector3::zeros())
    }

    /// |0⟩ with no derivative.
    pub fn zero_ket() -> Self {
        Self { v: Vector3::z(), dv: Vector3::zeros() }
    }
}

/// A density matrix together with its derivative at θ = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    rho: CMat,
    drho: CMat,
}

impl DensityState {
    pub fn new(rho: CMat, drho: CMat) -> Result<Self> {
        let d = rho.nrows();
        if !rho.is_square() || (d != 2 && d != 4) || drho.shape() != rho.shape() {
            return Err(Error::Validation("density state must be 2x2 or 4x4 with matching derivative".into()));
        }
        if !is_hermitian(&rho, HERMITIAN_TOL) || !is_hermitian(&drho, HERMITIAN_TOL) {
            return Err(Error::Validation("rho and drho must be Hermitian".into()));
        }
        let tr = rho.trace();
        if (tr - cr(1.0)).norm() > 1e-12 {
            return Err(Error::Validation(format!("Tr(rho) = {tr}, expected 1")));
        }
        if drho.trace().norm() > 1e-12 {
            return Err(Error::Validation("drho must be traceless".into()));
        }
        let (vals, _) = eigh(&rho);
        if vals[0] < -1e-10 {
            return Err(Error::Validation(format!("rho has negative eigenvalue {}", vals[0])));
        }
        Ok(Self { rho: hermitian_part(&rho), drho: hermitian_part(&drho) })
    }

    /// Skips validation; for states produced by trusted propagation code.
    pub(crate) fn from_parts(rho: CMat, drho: CMat) -> Self {
        Self { rho: hermitian_part(&rho), drho: hermitian_part(&drho) }
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn rho(&self) -> &CMat {
        &self.rho
    }

    pub fn drho(&self) -> &CMat {
        &self.drho
    }
}

pub fn bloch_to_density(b: &BlochState) -> Result<DensityState> {
    if b.v.norm() > 1.0 + 1e-10 {
        return Err(Error::Domain(format!("Bloch vector norm {} exceeds 1", b.v.norm())));
    }
    let rho = (identity(2) + bloch_op(&b.v)) * cr(0.5);
    let drho = bloch_op(&b.dv) * cr(0.5);
    Ok(DensityState::from_parts(rho, drho))
}

pub fn density_to_bloch(s: &DensityState) -> Result<BlochState> {
    if s.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: s.dim() });
    }
    Ok(BlochState { v: pauli_traces(s.rho()), dv: pauli_traces(s.drho()) })
}

/// Kraus operators of a trace-preserving map on a qubit or two qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    ops: Vec<CMat>,
}

impl KrausSet {
    pub fn new(ops: Vec<CMat>) -> Result<Self> {
        let d = check_kraus_shapes(&ops)?;
        let resid = frobenius(&(kraus_gram(&ops, d) - identity(d)));
        if resid > TP_TOL {
            return Err(Error::Validation(format!("Kraus set not trace preserving (residual {resid:e})")));
        }
        Ok(Self { ops })
    }

    pub fn from_unitary(u: CMat) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn ops(&self) -> &[CMat] {
        &self.ops
    }

    pub fn dim(&self) -> usize {
        self.ops[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn apply(&self, x: &CMat) -> CMat {
        apply_kraus(&self.ops, x)
    }

    /// The Kraus set of `next ∘ self`.
    pub fn then(&self, next: &KrausSet) -> Result<KrausSet> {
        if next.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: next.dim() });
        }
        let ops = next.ops.iter().flat_map(|a| self.ops.iter().map(move |b| a * b)).collect();
        Ok(KrausSet { ops })
    }
}

pub(crate) fn check_kraus_shapes(ops: &[CMat]) -> Result<usize> {
    let Some(first) = ops.first() else {
        return Err(Error::Validation("empty Kraus set".into()));
    };
    let d = first.nrows();
    if d != 2 && d != 4 {
        return Err(Error::Validation(format!("Kraus operators must be 2x2 or 4x4, got {d}")));
    }
    if ops.iter().any(|k| k.shape() != (d, d)) {
        return Err(Error::Validation("Kraus operators differ in shape".into()));
    }
    Ok(d)
}

pub(crate) fn kraus_gram(ops: &[CMat], d: usize) -> CMat {
    ops.iter().fold(CMat::zeros(d, d), |acc, k| acc + k.adjoint() * k)
}

/// Affine action v ↦ t + T·v of a qubit channel on Bloch vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTransferMap {
    pub t: Vector3<f64>,
    pub mat: Matrix3<f64>,
}

impl PauliTransferMap {
    pub fn new(t: Vector3<f64>, mat: Matrix3<f64>) -> Self {
        Self { t, mat }
    }

    pub fn identity() -> Self {
        Self { t: Vector3::zeros(), mat: Matrix3::identity() }
    }

    /// Map of ρ ↦ UρU† for a 2×2 unitary U.
    pub fn from_unitary(u: &CMat) -> Result<Self> {
        ptm_from_kraus(&KrausSet::from_unitary(u.clone())?)
    }

    /// Map of exp(−iφ n·σ/2), i.e. a rotation by φ about `axis`.
    pub fn rotation(axis: &Vector3<f64>, angle: f64) -> Self {
        let r = Rotation3::from_axis_angle(&Unit::new_normalize(*axis), angle);
        Self { t: Vector3::zeros(), mat: *r.matrix() }
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.t + self.mat * v
    }

    /// The map `next ∘ self`.
    pub fn then(&self, next: &PauliTransferMap) -> Self {
        Self { t: next.t + next.mat * self.t, mat: next.mat * self.mat }
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        self.t.norm() <= tol
    }

    /// Singular values of T, descending.
    pub fn singular_values(&self) -> [f64; 3] {
        let mut s: Vec<f64> = self.mat.svd(false, false).singular_values.iter().copied().collect();
        s.sort_by(|x, y| y.total_cmp(x));
        [s[0], s[1], s[2]]
    }

    pub fn choi(&self) -> CMat {
        choi_from_ptm(self)
    }

    pub fn is_cptp(&self) -> bool {
        validate_cptp(&self.choi()).map(|r| r.is_cp && r.is_tp).unwrap_or(false)
    }

    /// Returns the map if its Choi matrix is positive semidefinite.
    pub fn validated(self) -> Result<Self> {
        let rep = validate_cptp(&self.choi())?;
        if !rep.is_cp {
            return Err(Error::Validation(format!(
                "transfer map is not completely positive (min Choi eigenvalue {:e})",
                rep.min_eigenvalue
            )));
        }
        Ok(self)
    }

    /// A Kraus set realizing this map, from the Choi eigendecomposition.
    pub fn to_kraus(&self) -> Result<KrausSet> {
        kraus_from_choi(&self.choi())
    }
}

/// (t, T) of a linear map on 2×2 matrices, given as a closure.
pub(crate) fn transfer_of(f: impl Fn(&CMat) -> CMat) -> (Vector3<f64>, Matrix3<f64>) {
    let t = pauli_traces(&f(&identity(2))) * 0.5;
    let mut m = Matrix3::zeros();
    for j in 0..3 {
        let col = pauli_traces(&f(&pauli(j + 1))) * 0.5;
        m.set_column(j, &col);
    }
    (t, m)
}

pub fn ptm_from_kraus(ks: &KrausSet) -> Result<PauliTransferMap> {
    if ks.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: ks.dim() });
    }
    let (t, mat) = transfer_of(|x| ks.apply(x));
    Ok(PauliTransferMap { t, mat })
}

/// Σ_i vec(K_i)vec(K_i)† with vec index (a, j) ↦ a·d + j.
pub fn choi_from_kraus(ks: &KrausSet) -> CMat {
    choi_of_ops(ks.ops())
}

pub(crate) fn choi_of_ops(ops: &[CMat]) -> CMat {
    let d = ops[0].nrows();
    let mut out = CMat::zeros(d * d, d * d);
    for k in ops {
        let v = DVector::from_fn(d * d, |i, _| k[(i / d, i % d)]);
        out += &v * v.adjoint();
    }
    out
}

/// ½ Σ_μ E(σ_μ) ⊗ σ_μᵀ.
pub fn choi_from_ptm(ptm: &PauliTransferMap) -> CMat {
    let image = |j: usize| -> CMat {
        if j == 0 {
            identity(2) + bloch_op(&ptm.t)
        } else {
            bloch_op(&ptm.mat.column(j - 1).into_owned())
        }
    };
    (0..4).fold(CMat::zeros(4, 4), |acc, j| acc + kron(&image(j), &pauli(j).transpose()) * cr(0.5))
}

pub fn kraus_from_choi(choi: &CMat) -> Result<KrausSet> {
    let rep = validate_cptp(choi)?;
    if !rep.is_cp {
        return Err(Error::Validation(format!(
            "Choi matrix not positive semidefinite (min eigenvalue {:e})",
            rep.min_eigenvalue
        )));
    }
    let n = choi.nrows();
    let d = (n as f64).sqrt().round() as usize;
    let (vals, vecs) = eigh(choi);
    let cutoff = 1e-13 * vals[n - 1].abs().max(1.0);
    let ops: Vec<CMat> = (0..n)
        .rev()
        .filter(|&i| vals[i] > cutoff)
        .map(|i| CMat::from_fn(d, d, |a, j| vecs[(a * d + j, i)] * vals[i].sqrt()))
        .collect();
    KrausSet::new(ops)
}

/// Outcome of [`validate_cptp`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptpReport {
    pub is_cp: bool,
    pub is_tp: bool,
    pub min_eigenvalue: f64,
    pub tp_residual: f64,
}

pub fn validate_cptp(choi: &CMat) -> Result<CptpReport> {
    let n = choi.nrows();
    let d = (n as f64).sqrt().round() as usize;
    if !choi.is_square() || d * d != n || (d != 2 && d != 4) {
        return Err(Error::Validation(format!("Choi matrix must be 4x4 or 16x16, got {}x{}", n, choi.ncols())));
    }
    if !is_hermitian(choi, HERMITIAN_TOL) {
        return Err(Error::Validation("Choi matrix is not Hermitian".into()));
    }
    let (vals, _) = eigh(choi);
    let tp_residual = frobenius(&(partial_trace_first(choi, d) - identity(d)));
    Ok(CptpReport {
        is_cp: vals[0] >= -PSD_TOL,
        is_tp: tp_residual <= TP_TOL,
        min_eigenvalue: vals[0],
        tp_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn amp_damp(g: f64) -> KrausSet {
        let k0 = CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr((1.0 - g).sqrt())]);
        let k1 = CMat::from_row_slice(2, 2, &[cr(0.0), cr(g.sqrt()), cr(0.0), cr(0.0)]);
        KrausSet::new(vec![k0, k1]).unwrap()
    }

    #[test]
    fn pauli_coefficients() {
        let id = HermitianOp::identity(2);
        assert_eq!(pauli_decompose(&id).unwrap(), [2.0, 0.0, 0.0, 0.0]);
        let x = HermitianOp::new(pauli(1)).unwrap();
        assert_eq!(pauli_decompose(&x).unwrap(), [0.0, 2.0, 0.0, 0.0]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let xz = HermitianOp::new((pauli(1) + pauli(3)) * cr(s)).unwrap();
        let c = pauli_decompose(&xz).unwrap();
        assert_abs_diff_eq!(c[1], 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(c[3], 2f64.sqrt(), epsilon = 1e-15);
        let back = HermitianOp::from_pauli(c);
        assert!(frobenius(&(back.matrix() - xz.matrix())) < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(0.0), cr(0.0)]);
        assert!(matches!(HermitianOp::new(m), Err(Error::Validation(_))));
    }

    #[test]
    fn bloch_density_examples() {
        let s = bloch_to_density(&BlochState::zero_ket()).unwrap();
        assert_abs_diff_eq!(s.rho()[(0, 0)].re, 1.0);
        assert_eq!(frobenius(s.drho()), 0.0);

        let mixed = bloch_to_density(&BlochState::fixed(Vector3::zeros()).unwrap()).unwrap();
        assert!(frobenius(&(mixed.rho() - identity(2) * cr(0.5))) < 1e-15);

        let b = BlochState::new(Vector3::x(), Vector3::y()).unwrap();
        let s = bloch_to_density(&b).unwrap();
        assert!(frobenius(&(s.drho() - pauli(2) * cr(0.5))) < 1e-15);
        assert_abs_diff_eq!(s.rho()[(0, 1)].re, 0.5);

        let over = BlochState { v: Vector3::new(0.0, 0.0, 1.1), dv: Vector3::zeros() };
        assert!(matches!(bloch_to_density(&over), Err(Error::Domain(_))));
    }

    #[test]
    fn transfer_map_examples() {
        let id = ptm_from_kraus(&KrausSet::new(vec![identity(2)]).unwrap()).unwrap();
        assert_eq!(id.t, Vector3::zeros());
        assert!((id.mat - Matrix3::identity()).norm() < 1e-15);

        let deph = KrausSet::new(vec![identity(2) * cr(0.9f64.sqrt()), pauli(3) * cr(0.1f64.sqrt())]).unwrap();
        let p = ptm_from_kraus(&deph).unwrap();
        assert!(p.t.norm() < 1e-12);
        assert!((p.mat - Matrix3::from_diagonal(&Vector3::new(0.8, 0.8, 1.0))).norm() < 1e-12);

        let ad = ptm_from_kraus(&amp_damp(0.36)).unwrap();
        assert!((ad.t - Vector3::new(0.0, 0.0, 0.36)).norm() < 1e-12);
        assert!((ad.mat - Matrix3::from_diagonal(&Vector3::new(0.8, 0.8, 0.64))).norm() < 1e-12);
    }

    #[test]
    fn choi_examples() {
        let id = choi_from_kraus(&KrausSet::new(vec![identity(2)]).unwrap());
        assert_abs_diff_eq!(id.trace().re, 2.0, epsilon = 1e-15);
        let (vals, _) = eigh(&id);
        assert_abs_diff_eq!(vals[3], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[2], 0.0, epsilon = 1e-12);

        let p: f64 = 0.1;
        let deph = KrausSet::new(vec![identity(2) * cr((1.0 - p).sqrt()), pauli(3) * cr(p.sqrt())]).unwrap();
        let (vals, _) = eigh(&choi_from_kraus(&deph));
        assert_abs_diff_eq!(vals[3], 2.0 * (1.0 - p), epsilon = 1e-12);
        assert_abs_diff_eq!(vals[2], 2.0 * p, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], 0.0, epsilon = 1e-12);

        let full = KrausSet::new((0..4).map(|i| pauli(i) * cr(0.5)).collect()).unwrap();
        let (vals, _) = eigh(&choi_from_kraus(&full));
        for v in vals.iter() {
            assert_abs_diff_eq!(*v, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn cptp_validation_examples() {
        let p: f64 = 0.1;
        let deph = KrausSet::new(vec![identity(2) * cr((1.0 - p).sqrt()), pauli(3) * cr(p.sqrt())]).unwrap();
        let rep = validate_cptp(&choi_from_kraus(&deph)).unwrap();
        assert!(rep.is_cp && rep.is_tp);

        // The transpose map has the swap operator as its Choi matrix.
        let mut swap = CMat::zeros(4, 4);
        for a in 0..2 {
            for b in 0..2 {
                swap[(a * 2 + b, b * 2 + a)] = cr(1.0);
            }
        }
        let rep = validate_cptp(&swap).unwrap();
        assert!(!rep.is_cp);
        assert!(rep.is_tp);

        let bad = PauliTransferMap::new(Vector3::new(0.0, 0.0, 0.5), Matrix3::identity() * 0.9);
        assert!(!validate_cptp(&bad.choi()).unwrap().is_cp);
        assert!(bad.validated().is_err());
    }

    #[test]
    fn choi_ptm_agree() {
        let ks = amp_damp(0.3);
        let direct = choi_from_kraus(&ks);
        let via = choi_from_ptm(&ptm_from_kraus(&ks).unwrap());
        assert!(frobenius(&(direct - via)) < 1e-12);
    }

    #[test]
    fn kraus_lift_reproduces_map() {
        let ptm = ptm_from_kraus(&amp_damp(0.45)).unwrap();
        let lifted = ptm.to_kraus().unwrap();
        let back = ptm_from_kraus(&lifted).unwrap();
        assert!((back.t - ptm.t).norm() < 1e-12);
        assert!((back.mat - ptm.mat).norm() < 1e-12);
    }

    #[test]
    fn rotation_sign() {
        // exp(-iφX/2)|0⟩ has Bloch vector (0, -sin φ, cos φ).
        let phi: f64 = 0.3;
        let u = (identity(2) * cr((phi / 2.0).cos())) - pauli(1) * c(0.0, (phi / 2.0).sin());
        let from_u = PauliTransferMap::from_unitary(&u).unwrap();
        let rot = PauliTransferMap::rotation(&Vector3::x(), phi);
        assert!((from_u.mat - rot.mat).norm() < 1e-14);
        let v = rot.apply(&Vector3::z());
        assert_abs_diff_eq!(v[1], -phi.sin(), epsilon = 1e-15);
    }
}
