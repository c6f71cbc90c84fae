//! One-parameter qubit channels, their classification, the Kraus-span
//! conditions, and the canonical Pauli-basis Kraus form.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::fisher::{hermitian_basis, GaugeMatrix};
use crate::qubit::{
    bloch_op, check_kraus_shapes, cr, eigh, frobenius, hermitian_part, identity, kraus_gram, pauli,
    pauli_traces, transfer_of, CMat, HermitianOp, KrausSet, PauliTransferMap, C64, TP_TOL,
};

/// Default singular-value tolerance for [`classify`].
pub const CLASSIFY_TOL: f64 = 1e-7;

/// A Kraus operator and its θ-derivative at θ = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausPair {
    pub op: CMat,
    pub deriv: CMat,
}

/// A channel family E_θ, known to first order around θ = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct OneParamChannel {
    kraus: Vec<KrausPair>,
}

impl OneParamChannel {
    pub fn new(kraus: Vec<KrausPair>) -> Result<Self> {
        let ops: Vec<CMat> = kraus.iter().map(|k| k.op.clone()).collect();
        let d = check_kraus_shapes(&ops)?;
        if kraus.iter().any(|k| k.deriv.shape() != (d, d)) {
            return Err(Error::Validation("Kraus derivative shape differs from operator".into()));
        }
        let resid = frobenius(&(kraus_gram(&ops, d) - identity(d)));
        if resid > TP_TOL {
            return Err(Error::Validation(format!("Kraus set not trace preserving (residual {resid:e})")));
        }
        let first = kraus
            .iter()
            .fold(CMat::zeros(d, d), |acc, k| acc + k.deriv.adjoint() * &k.op + k.op.adjoint() * &k.deriv);
        if frobenius(&first) > 1e-9 {
            return Err(Error::Validation(format!(
                "family not trace preserving to first order (residual {:e})",
                frobenius(&first)
            )));
        }
        Ok(Self { kraus })
    }

    /// A family with zero derivative.
    pub fn constant(ks: &KrausSet) -> Self {
        let d = ks.dim();
        Self {
            kraus: ks.ops().iter().map(|k| KrausPair { op: k.clone(), deriv: CMat::zeros(d, d) }).collect(),
        }
    }

    /// θ ↦ e^{-iθG}·U for Hermitian G and unitary U.
    pub fn unitary(u: &CMat, generator: &CMat) -> Result<Self> {
        let deriv = generator * u * C64::new(0.0, -1.0);
        Self::new(vec![KrausPair { op: u.clone(), deriv }])
    }

    pub fn pairs(&self) -> &[KrausPair] {
        &self.kraus
    }

    pub fn dim(&self) -> usize {
        self.kraus[0].op.nrows()
    }

    /// Number of Kraus operators.
    pub fn rank(&self) -> usize {
        self.kraus.len()
    }

    pub fn ops(&self) -> Vec<CMat> {
        self.kraus.iter().map(|k| k.op.clone()).collect()
    }

    pub fn derivs(&self) -> Vec<CMat> {
        self.kraus.iter().map(|k| k.deriv.clone()).collect()
    }

    pub fn kraus_set(&self) -> KrausSet {
        KrausSet::new(self.ops()).expect("validated at construction")
    }

    /// Image of (ρ, ∂ρ) under E_θ at θ = 0, derivative included.
    pub fn apply(&self, rho: &CMat, drho: &CMat) -> (CMat, CMat) {
        let d = self.dim();
        let mut out = CMat::zeros(d, d);
        let mut dout = CMat::zeros(d, d);
        for k in &self.kraus {
            let ka = k.op.adjoint();
            out += &k.op * rho * &ka;
            dout += &k.op * drho * &ka + &k.deriv * rho * &ka + &k.op * rho * k.deriv.adjoint();
        }
        (out, dout)
    }

    /// H = i Σ K_i† K̇_i.
    pub fn hamiltonian(&self) -> CMat {
        let d = self.dim();
        let s = self.kraus.iter().fold(CMat::zeros(d, d), |acc, k| acc + k.op.adjoint() * &k.deriv);
        hermitian_part(&(s * C64::new(0.0, 1.0)))
    }

    /// Transfer map of E_θ at θ = 0 (qubit only).
    pub fn ptm(&self) -> Result<PauliTransferMap> {
        crate::qubit::ptm_from_kraus(&self.kraus_set())
    }

    /// (ṫ, Ṫ): the θ-derivative of the transfer map at θ = 0.
    pub fn ptm_derivative(&self) -> Result<(Vector3<f64>, Matrix3<f64>)> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: self.dim() });
        }
        let z = CMat::zeros(2, 2);
        Ok(transfer_of(|x| self.apply(x, &z).1))
    }

    /// The family `control ∘ E_θ`, with Kraus operators C_a K_b.
    pub fn followed_by(&self, control: &KrausSet) -> Result<Self> {
        if control.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: control.dim() });
        }
        let kraus = control
            .ops()
            .iter()
            .flat_map(|c| self.kraus.iter().map(move |k| KrausPair { op: c * &k.op, deriv: c * &k.deriv }))
            .collect();
        Ok(Self { kraus })
    }

    /// `next ∘ self` where both depend on θ: K = M_a N_b, K̇ = Ṁ_a N_b + M_a Ṅ_b.
    pub fn then(&self, next: &OneParamChannel) -> Result<Self> {
        if next.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: next.dim() });
        }
        let kraus = next
            .kraus
            .iter()
            .flat_map(|m| {
                self.kraus.iter().map(move |n| KrausPair {
                    op: &m.op * &n.op,
                    deriv: &m.deriv * &n.op + &m.op * &n.deriv,
                })
            })
            .collect();
        Ok(Self { kraus })
    }

    /// E_θ ⊗ 𝟙 on a qubit paired with an idle qubit.
    pub fn tensor_identity(&self) -> Result<Self> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: self.dim() });
        }
        let id = identity(2);
        let kraus = self
            .kraus
            .iter()
            .map(|k| KrausPair { op: k.op.kronecker(&id), deriv: k.deriv.kronecker(&id) })
            .collect();
        Ok(Self { kraus })
    }

    /// Derivatives K̇_b − i Σ_j h_bj K_j in the gauge h.
    pub fn gauged_derivs(&self, h: &GaugeMatrix) -> Result<Vec<CMat>> {
        let r = self.rank();
        if h.dim() != r {
            return Err(Error::DimensionMismatch { expected: r, found: h.dim() });
        }
        let mi = C64::new(0.0, -1.0);
        Ok((0..r)
            .map(|b| {
                (0..r).fold(self.kraus[b].deriv.clone(), |acc, j| acc + &self.kraus[j].op * (mi * h.matrix()[(b, j)]))
            })
            .collect())
    }
}

/// The dephasing-class family
/// E_θ(ρ) = (1−p_θ) e^{−iG0θ} ρ e^{iG0θ} + p_θ Z e^{−iG1θ} ρ e^{iG1θ} Z.
///
/// `g0` and `g1` are Pauli coefficient triples: G = g·σ, so Tr(G·X) = 2·g[0].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingFamily {
    pub p: f64,
    pub pdot: f64,
    pub g0: Vector3<f64>,
    pub g1: Vector3<f64>,
}

impl DephasingFamily {
    pub fn new(p: f64, pdot: f64, g0: Vector3<f64>, g1: Vector3<f64>) -> Result<Self> {
        let fam = Self { p, pdot, g0, g1 };
        fam.validate()?;
        Ok(fam)
    }

    /// Dephasing with strength p followed by a rotation e^{−iθ g·σ}.
    pub fn dephased_rotation(p: f64, g: Vector3<f64>) -> Result<Self> {
        Self::new(p, 0.0, g, Vector3::new(-g[0], -g[1], g[2]))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p <= 0.5) {
            return Err(Error::Domain(format!("dephasing strength p = {} outside (0, 1/2]", self.p)));
        }
        let finite = self.pdot.is_finite() && self.g0.iter().chain(self.g1.iter()).all(|x| x.is_finite());
        if !finite {
            return Err(Error::Domain("family parameters must be finite".into()));
        }
        Ok(())
    }

    pub fn g0_op(&self) -> HermitianOp {
        HermitianOp::from_bloch(&self.g0)
    }

    pub fn g1_op(&self) -> HermitianOp {
        HermitianOp::from_bloch(&self.g1)
    }

    /// Coefficients of G+ = (1−p)G0 + pG1.
    pub fn g_plus(&self) -> Vector3<f64> {
        self.g0 * (1.0 - self.p) + self.g1 * self.p
    }

    /// Coefficients of G− = (1−p)G0 − pG1.
    pub fn g_minus(&self) -> Vector3<f64> {
        self.g0 * (1.0 - self.p) - self.g1 * self.p
    }

    /// Bloch-space contraction M = diag(1−2p, 1−2p, 1).
    pub fn contraction(&self) -> Matrix3<f64> {
        let s = 1.0 - 2.0 * self.p;
        Matrix3::from_diagonal(&Vector3::new(s, s, 1.0))
    }

    /// Bloch-space derivative D, so that v̇' = D v + M v̇ for one channel use.
    pub fn derivative_matrix(&self) -> Matrix3<f64> {
        // Tr(G σ) = 2 g for coefficient triples.
        let gp = self.g_plus() * 2.0;
        let gm = self.g_minus() * 2.0;
        let pd = -2.0 * self.pdot;
        Matrix3::new(
            pd, -gm[2], gm[1], //
            gm[2], pd, -gm[0], //
            -gp[1], gp[0], 0.0,
        )
    }
}

/// Natural Kraus pairs K0 = √(1−p)𝟙, K1 = √p Z with their derivatives.
pub fn dephasing_channel(fam: &DephasingFamily) -> Result<OneParamChannel> {
    fam.validate()?;
    let (p, pd) = (fam.p, fam.pdot);
    let mi = C64::new(0.0, -1.0);
    let (a, b) = ((1.0 - p).sqrt(), p.sqrt());
    let z = pauli(3);
    let k0 = KrausPair {
        op: identity(2) * cr(a),
        deriv: bloch_op(&fam.g0) * (mi * a) - identity(2) * cr(pd / (2.0 * a)),
    };
    let k1 = KrausPair {
        op: &z * cr(b),
        deriv: &z * bloch_op(&fam.g1) * (mi * b) + &z * cr(pd / (2.0 * b)),
    };
    OneParamChannel::new(vec![k0, k1])
}

/// Depolarizing channel ρ ↦ λρ + (1−λ)𝟙/2 for λ ∈ [−1/3, 1].
pub fn depolarizing_kraus(lambda: f64) -> Result<KrausSet> {
    if !(-1.0 / 3.0..=1.0).contains(&lambda) {
        return Err(Error::Domain(format!("depolarizing lambda must lie in [-1/3, 1], got {lambda}")));
    }
    let w0 = ((1.0 + 3.0 * lambda) / 4.0).max(0.0).sqrt();
    let w = ((1.0 - lambda) / 4.0).sqrt();
    KrausSet::new(vec![identity(2) * cr(w0), pauli(1) * cr(w), pauli(2) * cr(w), pauli(3) * cr(w)])
}

/// θ ↦ e^{−iθ a·σ} after depolarizing with strength λ.
pub fn rotated_depolarizing(lambda: f64, axis: &Vector3<f64>) -> Result<OneParamChannel> {
    let g = bloch_op(axis);
    let mi = C64::new(0.0, -1.0);
    let pairs = depolarizing_kraus(lambda)?
        .ops()
        .iter()
        .map(|k| KrausPair { op: k.clone(), deriv: &g * k * mi })
        .collect();
    OneParamChannel::new(pairs)
}

/// Classes of qubit channels by the singular values of T.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelTag {
    Unitary,
    DephasingClass,
    StrictlyContractive,
}

impl std::fmt::Display for ChannelTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ChannelTag::Unitary => "Unitary",
            ChannelTag::DephasingClass => "DephasingClass",
            ChannelTag::StrictlyContractive => "StrictlyContractive",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelClass {
    pub tag: ChannelTag,
    /// Descending.
    pub singular_values: [f64; 3],
}

/// Values in [1−tol, ∞) count as one, values at or below 1−2·tol count as
/// contractive, and anything in between is rejected as ambiguous.
pub fn classify(ptm: &PauliTransferMap, tol: f64) -> Result<ChannelClass> {
    let sv = ptm.singular_values();
    let mut ones = 0;
    for &s in &sv {
        if s >= 1.0 - tol {
            ones += 1;
        } else if s > 1.0 - 2.0 * tol {
            return Err(Error::AmbiguousClassification { singular_values: sv });
        }
    }
    let tag = match ones {
        3 => ChannelTag::Unitary,
        1 => ChannelTag::DephasingClass,
        0 => ChannelTag::StrictlyContractive,
        _ => return Err(Error::AmbiguousClassification { singular_values: sv }),
    };
    Ok(ChannelClass { tag, singular_values: sv })
}

/// Real coordinates of a Hermitian matrix that are orthonormal for the
/// Hilbert–Schmidt inner product.
fn herm_coords(a: &CMat) -> Vec<f64> {
    let d = a.nrows();
    let s2 = std::f64::consts::SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(a[(i, i)].re);
    }
    for i in 0..d {
        for j in i + 1..d {
            out.push(s2 * a[(i, j)].re);
            out.push(s2 * a[(i, j)].im);
        }
    }
    out
}

fn herm_from_coords(x: &[f64], d: usize) -> CMat {
    let s2 = std::f64::consts::SQRT_2;
    let mut m = CMat::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = cr(x[i]);
    }
    let mut k = d;
    for i in 0..d {
        for j in i + 1..d {
            let z = C64::new(x[k], x[k + 1]) / s2;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    m
}

/// Orthonormal basis (Hilbert–Schmidt) of the Hermitian operators in
/// span{K_i† K_j}.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSpan {
    pub basis: Vec<HermitianOp>,
    coords: Vec<Vec<f64>>,
}

impl KrausSpan {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Orthogonal projection of a Hermitian matrix onto the span.
    pub fn project(&self, a: &CMat) -> CMat {
        let x = herm_coords(&hermitian_part(a));
        let d = a.nrows();
        let mut acc = vec![0.0; x.len()];
        for b in &self.coords {
            let c: f64 = b.iter().zip(&x).map(|(u, v)| u * v).sum();
            for (o, u) in acc.iter_mut().zip(b) {
                *o += c * u;
            }
        }
        herm_from_coords(&acc, d)
    }

    /// Frobenius norm of the component orthogonal to the span.
    pub fn residual(&self, a: &CMat) -> f64 {
        frobenius(&(hermitian_part(a) - self.project(a)))
    }
}

pub fn kraus_span(ks: &KrausSet) -> KrausSpan {
    span_of_ops(ks.ops())
}

pub(crate) fn span_of_ops(ops: &[CMat]) -> KrausSpan {
    let d = ops[0].nrows();
    let mut gens = Vec::new();
    for (i, ki) in ops.iter().enumerate() {
        for kj in &ops[i..] {
            let a = ki.adjoint() * kj;
            gens.push(herm_coords(&hermitian_part(&a)));
            gens.push(herm_coords(&hermitian_part(&(a * C64::new(0.0, -1.0)))));
        }
    }
    let scale = gens.iter().map(|g| norm(g)).fold(0.0, f64::max);
    let mut coords: Vec<Vec<f64>> = Vec::new();
    for g in gens {
        let mut v = g;
        // Two Gram–Schmidt passes keep the basis orthonormal to machine precision.
        for _ in 0..2 {
            for b in &coords {
                let c: f64 = b.iter().zip(&v).map(|(x, y)| x * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= c * bi;
                }
            }
        }
        let n = norm(&v);
        if n > 1e-10 * scale {
            coords.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    let basis = coords.iter().map(|c| HermitianOp::new(herm_from_coords(c, d)).expect("Hermitian by construction")).collect();
    KrausSpan { basis, coords }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Result of [`hnks_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct HnksReport {
    pub holds: bool,
    pub h: HermitianOp,
    pub residual: f64,
}

/// Whether H = iΣK†K̇ lies outside the Kraus span, relative to ‖H‖.
pub fn hnks_check(ch: &OneParamChannel, tol: f64) -> HnksReport {
    let h = ch.hamiltonian();
    let span = span_of_ops(&ch.ops());
    let residual = span.residual(&h);
    let hn = frobenius(&h);
    // H assembled from terms of size ~‖K̇‖ cancels only to rounding level.
    let floor = 1e-12 * (1.0 + ch.pairs().iter().map(|k| frobenius(&k.deriv)).sum::<f64>());
    let holds = hn > floor && residual > tol * hn;
    HnksReport { holds, h: HermitianOp::new(h).expect("Hermitian by construction"), residual }
}

/// Whether G0 or G1 has a component off the Z axis.
pub fn rgnks_check(fam: &DephasingFamily, tol: f64) -> bool {
    let t = [fam.g0[0], fam.g0[1], fam.g1[0], fam.g1[1]].map(|x| (2.0 * x).abs());
    t.into_iter().fold(0.0, f64::max) > tol
}

/// Kraus coefficients in the block form [[m00, m†], [0, 𝔪]] over the Pauli
/// basis (𝟙, X, Y, Z).
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalPauliForm {
    pub m00: f64,
    pub m: Vector3<C64>,
    pub frak_m: Matrix3<C64>,
}

impl CanonicalPauliForm {
    /// The 4×4 coefficient matrix, rows indexing Kraus operators.
    pub fn matrix(&self) -> CMat {
        let mut out = CMat::zeros(4, 4);
        out[(0, 0)] = cr(self.m00);
        for j in 0..3 {
            out[(0, j + 1)] = self.m[j].conj();
            for i in 0..3 {
                out[(i + 1, j + 1)] = self.frak_m[(i, j)];
            }
        }
        out
    }

    /// The four canonical Kraus operators (some may vanish).
    pub fn kraus(&self) -> Vec<CMat> {
        coefficient_rows_to_ops(&self.matrix())
    }

    /// The unitality witness m00·‖Re m‖.
    pub fn nonunitality(&self) -> f64 {
        self.m00 * self.m.map(|z| z.re).norm()
    }
}

fn coefficient_rows_to_ops(mc: &CMat) -> Vec<CMat> {
    (0..mc.nrows())
        .map(|i| (0..4).fold(CMat::zeros(2, 2), |acc, j| acc + pauli(j) * mc[(i, j)]))
        .collect()
}

/// Rows are Kraus operators, columns their 𝟙, X, Y, Z coefficients.
fn coefficient_rows(ops: &[CMat]) -> CMat {
    CMat::from_fn(ops.len(), 4, |i, j| (&ops[i] * pauli(j)).trace() * cr(0.5))
}

pub fn canonical_pauli_form(ks: &KrausSet) -> Result<CanonicalPauliForm> {
    if ks.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: ks.dim() });
    }
    let mm = coefficient_rows(ks.ops());
    // M†M is invariant under Kraus remixing M → UM; factor it in block form.
    let p = mm.adjoint() * &mm;
    let m00 = p[(0, 0)].re.max(0.0).sqrt();
    let m = if m00 > 1e-12 {
        Vector3::from_fn(|j, _| p[(j + 1, 0)] / cr(m00))
    } else {
        Vector3::zeros()
    };
    let mut schur = CMat::from_fn(3, 3, |i, j| p[(i + 1, j + 1)] - m[i] * m[j].conj());
    schur = hermitian_part(&schur);
    // Eigenvalues at rounding level would turn into O(1e-8) noise under the
    // square root, so they are set to zero first.
    let (vals, vecs) = eigh(&schur);
    let floor = 1e-13 * p.trace().re.max(1.0);
    let roots = vals.map(|v| if v > floor { cr(v.sqrt()) } else { cr(0.0) });
    let root = &vecs * CMat::from_diagonal(&roots) * vecs.adjoint();
    let frak_m = Matrix3::from_fn(|i, j| root[(i, j)]);
    Ok(CanonicalPauliForm { m00, m, frak_m })
}

/// Σ_ij h_ij K_i† K_j.
pub(crate) fn gauge_combination(ops: &[CMat], h: &CMat) -> CMat {
    let d = ops[0].nrows();
    let mut out = CMat::zeros(d, d);
    for (i, ki) in ops.iter().enumerate() {
        let kia = ki.adjoint();
        for (j, kj) in ops.iter().enumerate() {
            if h[(i, j)] != C64::new(0.0, 0.0) {
                out += &kia * kj * h[(i, j)];
            }
        }
    }
    out
}

/// One least-squares correction step on H + Σ h_ij K_i†K_j = 0, taken in
/// the input Kraus basis. The map back from the canonical basis loses
/// accuracy when the coefficient matrix has small singular values.
fn refine_gauge(ops: &[CMat], h: CMat, big_h: &CMat) -> CMat {
    let coeffs = |a: &CMat| -> [f64; 4] {
        let t = pauli_traces(a);
        [a.trace().re / 2.0, t[0] / 2.0, t[1] / 2.0, t[2] / 2.0]
    };
    let basis = hermitian_basis(ops.len());
    let mut a = nalgebra::DMatrix::<f64>::zeros(4, basis.len());
    for (m, e) in basis.iter().enumerate() {
        let c = coeffs(&gauge_combination(ops, e));
        for (row, v) in c.iter().enumerate() {
            a[(row, m)] = *v;
        }
    }
    let r = coeffs(&(big_h + gauge_combination(ops, &h)));
    let rhs = -nalgebra::DVector::from_row_slice(&r);
    let svd = a.svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |x, &y| x.max(y));
    let Ok(x) = svd.solve(&rhs, 1e-12 * smax) else { return h };
    basis.iter().zip(x.iter()).fold(h, |acc, (e, &xm)| acc + e * cr(xm))
}

/// A Hermitian h with H + Σ_ij h_ij K_i†K_j = 0, built in the canonical
/// Kraus basis from one eigenvector of 𝔪 and mapped back to `ks`.
pub fn solve_h_annihilating(ks: &KrausSet, h_op: &HermitianOp) -> Result<GaugeMatrix> {
    if ks.dim() != 2 || h_op.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: ks.dim().max(h_op.dim()) });
    }
    let cf = canonical_pauli_form(ks)?;
    if cf.nonunitality() <= 1e-9 {
        return Err(Error::NotApplicable("channel is unital; no annihilating h is guaranteed".into()));
    }
    let mc = cf.matrix();
    let canon = coefficient_rows_to_ops(&mc);
    let big_h = h_op.matrix();
    let target = -pauli_traces(big_h) * 0.5;
    let h_norm = frobenius(big_h);

    let m_in = coefficient_rows(ks.ops());
    // Input Kraus operators are K = U·K_canonical with U = M_in·M_c⁺.
    let mc_pinv = mc.clone().pseudo_inverse(1e-12).map_err(|e| Error::Validation(e.to_string()))?;
    let iso = &m_in * mc_pinv;

    let frak = CMat::from_fn(3, 3, |i, j| cf.frak_m[(i, j)]);
    let (vals, vecs) = eigh(&frak);
    let scale = vals.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-300);

    let mut best: Option<(f64, CMat)> = None;
    for i in 0..3 {
        if vals[i] <= 1e-10 * scale {
            continue;
        }
        let v = vecs.column(i).into_owned();
        let embed = |hv: &nalgebra::DVector<C64>, frak_h: &CMat| -> CMat {
            let mut h = CMat::zeros(4, 4);
            for a in 0..3 {
                h[(a + 1, 0)] = hv[a];
                h[(0, a + 1)] = hv[a].conj();
                for b in 0..3 {
                    h[(a + 1, b + 1)] = frak_h[(a, b)];
                }
            }
            h
        };
        let zero3 = CMat::zeros(3, 3);
        let zero_v = nalgebra::DVector::<C64>::zeros(3);
        let basis = [
            embed(&v, &zero3),
            embed(&(&v * C64::new(0.0, 1.0)), &zero3),
            embed(&zero_v, &(&v * v.adjoint())),
        ];
        let cols: Vec<Vector3<f64>> =
            basis.iter().map(|h| pauli_traces(&gauge_combination(&canon, h)) * 0.5).collect();
        let a = Matrix3::from_columns(&cols);
        let det = a.determinant();
        if det.abs() <= 1e-12 * cols.iter().map(|c| c.norm()).product::<f64>().max(1e-300) {
            continue;
        }
        let Some(x) = a.lu().solve(&target) else { continue };
        let mut h_cn = &basis[0] * cr(x[0]) + &basis[1] * cr(x[1]) + &basis[2] * cr(x[2]);
        let q = gauge_combination(&canon, &h_cn);
        let shift = -(big_h.trace() + q.trace()) * cr(0.5);
        h_cn += identity(4) * shift;
        let h = refine_gauge(ks.ops(), hermitian_part(&(&iso * h_cn * iso.adjoint())), big_h);
        let resid = frobenius(&(big_h + gauge_combination(ks.ops(), &h)));
        if resid > 1e-9 * (h_norm + 1.0) {
            continue;
        }
        let n = frobenius(&h);
        if best.as_ref().is_none_or(|(bn, _)| n < *bn) {
            best = Some((n, h));
        }
    }
    match best {
        Some((_, h)) => GaugeMatrix::new(h),
        None => Err(Error::NotApplicable("no eligible eigenvector of the canonical block".into())),
    }
}
