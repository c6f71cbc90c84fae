//! Quantum and classical Fisher information for states, measurements and
//! channels, plus QFI contraction coefficients.
//!
//! Channel QFI is 4·min_h ‖α(h)‖ with α(h) = Σ_j B_j(h)†B_j(h) and
//! B_j(h) = K̇_j − i Σ_i h_ji K_i. The minimization smooths the largest
//! eigenvalue with a log-sum-exp of temperature μ, runs BFGS while μ shrinks,
//! and certifies the result with the dual bound min_h Tr(P·α(h)) at the
//! final soft-max density P.

use nalgebra::{DMatrix, DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::OneParamChannel;
use crate::error::{Error, Result};
use crate::optimize::bfgs;
use crate::qubit::{
    cr, eigh, hermitian_part, is_hermitian, psd_sqrt, BlochState, CMat, DensityState, HermitianOp,
    PauliTransferMap, C64, HERMITIAN_TOL,
};

/// Eigenvalue-pair cutoff in the QFI sum.
pub const QFI_EPS: f64 = 1e-12;

/// Default seed for the gauge optimizer.
pub const DEFAULT_SEED: u64 = 0x5eed;

/// A Hermitian r×r gauge matrix mixing Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeMatrix {
    h: CMat,
}

impl GaugeMatrix {
    pub fn new(h: CMat) -> Result<Self> {
        if !is_hermitian(&h, HERMITIAN_TOL) {
            return Err(Error::Validation("gauge matrix must be square and Hermitian".into()));
        }
        Ok(Self { h: hermitian_part(&h) })
    }

    pub fn zero(r: usize) -> Self {
        Self { h: CMat::zeros(r, r) }
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.h
    }

    /// Builds h = Σ_m x_m E_m over the basis of [`hermitian_basis`].
    pub fn from_params(x: &[f64], r: usize) -> Self {
        let basis = hermitian_basis(r);
        let h = basis.iter().zip(x).fold(CMat::zeros(r, r), |acc, (e, &xi)| acc + e * cr(xi));
        Self { h }
    }
}

/// Real basis of r×r Hermitian matrices: diagonal units, then
/// e_ij + e_ji and i·e_ij − i·e_ji for i < j.
pub fn hermitian_basis(r: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(r * r);
    for i in 0..r {
        let mut e = CMat::zeros(r, r);
        e[(i, i)] = cr(1.0);
        out.push(e);
    }
    for i in 0..r {
        for j in i + 1..r {
            let mut e = CMat::zeros(r, r);
            e[(i, j)] = cr(1.0);
            e[(j, i)] = cr(1.0);
            out.push(e);
            let mut e = CMat::zeros(r, r);
            e[(i, j)] = C64::new(0.0, 1.0);
            e[(j, i)] = C64::new(0.0, -1.0);
            out.push(e);
        }
    }
    out
}

/// QFI of a state, with a flag raised when part of ∂ρ lives on skipped
/// (near-kernel) eigenvalue pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiValue {
    pub value: f64,
    pub kernel_leak: bool,
}

pub fn qfi_state(s: &DensityState) -> QfiValue {
    qfi_matrices(s.rho(), s.drho())
}

pub(crate) fn qfi_matrices(rho: &CMat, drho: &CMat) -> QfiValue {
    let (vals, vecs) = eigh(rho);
    let dm = vecs.adjoint() * drho * &vecs;
    let n = vals.len();
    let mut value = 0.0;
    let mut leaked = 0.0;
    for i in 0..n {
        for j in 0..n {
            let s = vals[i] + vals[j];
            let w = dm[(i, j)].norm_sqr();
            if s > QFI_EPS {
                value += 2.0 * w / s;
            } else {
                leaked += w;
            }
        }
    }
    QfiValue { value, kernel_leak: leaked.sqrt() > 1e-9 }
}

/// Closed-form qubit QFI ‖v̇‖² + (v·v̇)²/(1−‖v‖²).
pub fn qfi_bloch(b: &BlochState) -> Result<f64> {
    let r2 = b.v.norm_squared();
    if r2.sqrt() > 1.0 + 1e-10 {
        return Err(Error::Domain(format!("Bloch vector norm {} exceeds 1", r2.sqrt())));
    }
    let overlap = b.v.dot(&b.dv);
    let purity_gap = 1.0 - r2;
    if purity_gap <= 1e-12 {
        if overlap.abs() > 1e-9 {
            return Err(Error::InconsistentDerivative { overlap });
        }
        return Ok(b.dv.norm_squared());
    }
    Ok(b.dv.norm_squared() + overlap * overlap / purity_gap)
}

/// Symmetric logarithmic derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct Sld {
    pub l: HermitianOp,
    pub kernel_leak: bool,
}

pub fn sld(s: &DensityState) -> Sld {
    let (vals, vecs) = eigh(s.rho());
    let dm = vecs.adjoint() * s.drho() * &vecs;
    let n = vals.len();
    let mut l = CMat::zeros(n, n);
    let mut leaked = 0.0;
    for i in 0..n {
        for j in 0..n {
            let sum = vals[i] + vals[j];
            if sum > QFI_EPS {
                l[(i, j)] = dm[(i, j)] * cr(2.0 / sum);
            } else {
                leaked += dm[(i, j)].norm_sqr();
            }
        }
    }
    let l = hermitian_part(&(&vecs * l * vecs.adjoint()));
    Sld { l: HermitianOp::new(l).expect("Hermitian by construction"), kernel_leak: leaked.sqrt() > 1e-9 }
}

/// Classical FI with a flag for zero-probability outcomes that carried signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalFi {
    pub value: f64,
    pub excluded: bool,
}

pub fn classical_fi(p: &[f64], dp: &[f64]) -> Result<ClassicalFi> {
    if p.len() != dp.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), found: dp.len() });
    }
    if p.iter().any(|&x| x < -1e-12 || !x.is_finite()) {
        return Err(Error::Domain("probabilities must be nonnegative".into()));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("probabilities sum to {total}")));
    }
    if dp.iter().sum::<f64>().abs() > 1e-10 {
        return Err(Error::Domain("probability derivatives must sum to zero".into()));
    }
    Ok(fi_unchecked(p, dp))
}

fn fi_unchecked(p: &[f64], dp: &[f64]) -> ClassicalFi {
    let mut value = 0.0;
    let mut excluded = false;
    for (&pi, &di) in p.iter().zip(dp) {
        if pi > 1e-15 {
            value += di * di / pi;
        } else if di.abs() > 1e-12 {
            excluded = true;
        }
    }
    ClassicalFi { value, excluded }
}

/// A positive operator-valued measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<CMat>,
}

impl Povm {
    pub fn new(elements: Vec<CMat>) -> Result<Self> {
        let Some(first) = elements.first() else {
            return Err(Error::Validation("empty POVM".into()));
        };
        let d = first.nrows();
        let mut sum = CMat::zeros(d, d);
        for e in &elements {
            if e.shape() != (d, d) || !is_hermitian(e, 1e-10) {
                return Err(Error::Validation("POVM elements must be Hermitian and equal in size".into()));
            }
            let (vals, _) = eigh(e);
            if vals[0] < -1e-10 {
                return Err(Error::Validation(format!("POVM element has eigenvalue {}", vals[0])));
            }
            sum += e;
        }
        let resid = crate::qubit::frobenius(&(sum - CMat::identity(d, d)));
        if resid > 1e-10 {
            return Err(Error::Validation(format!("POVM elements sum to identity only within {resid:e}")));
        }
        Ok(Self { elements })
    }

    /// Projective measurement onto the columns of a unitary.
    pub fn projective(basis: &CMat) -> Result<Self> {
        let els = (0..basis.ncols())
            .map(|k| {
                let v = basis.column(k);
                v * v.adjoint()
            })
            .collect();
        Self::new(els)
    }

    /// Binary readout {(1−q)|0⟩⟨0| + q|1⟩⟨1|, 𝟙 − ·} with bit-flip rate q.
    pub fn noisy_z_readout(q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Domain(format!("readout flip rate {q} outside [0, 1]")));
        }
        let m = CMat::from_diagonal(&DVector::from_vec(vec![cr(1.0 - q), cr(q)]));
        let rest = CMat::identity(2, 2) - &m;
        Self::new(vec![m, rest])
    }

    pub fn elements(&self) -> &[CMat] {
        &self.elements
    }
}

pub fn povm_fi(s: &DensityState, m: &Povm) -> Result<f64> {
    let d = s.dim();
    if m.elements[0].nrows() != d {
        return Err(Error::DimensionMismatch { expected: d, found: m.elements[0].nrows() });
    }
    let p: Vec<f64> = m.elements.iter().map(|e| (s.rho() * e).trace().re.max(0.0)).collect();
    let dp: Vec<f64> = m.elements.iter().map(|e| (s.drho() * e).trace().re).collect();
    Ok(fi_unchecked(&p, &dp).value)
}

/// Bures distance √(2(1 − Tr|√ρ1 √ρ2|)).
pub fn bures_distance(rho1: &CMat, rho2: &CMat) -> f64 {
    let a = support_factor(rho1);
    let b = support_factor(rho2);
    // Fidelity as the trace norm of A†B where ρ1 = AA†, ρ2 = BB†; this avoids
    // square roots of rounding-level eigenvalues.
    let fid: f64 = (a.adjoint() * b).svd(false, false).singular_values.iter().sum();
    (2.0 * (1.0 - fid)).max(0.0).sqrt()
}

fn support_factor(rho: &CMat) -> CMat {
    let (vals, vecs) = eigh(rho);
    let top = vals.iter().fold(0.0f64, |a, &b| a.max(b));
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 1e-14 * top.max(1e-300)).collect();
    CMat::from_fn(rho.nrows(), keep.len().max(1), |r, c| match keep.get(c) {
        Some(&i) => vecs[(r, i)] * vals[i].sqrt(),
        None => cr(0.0),
    })
}

/// Optimal ancilla-assisted channel QFI and the minimizing gauge.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelQfi {
    pub value: f64,
    pub h_opt: GaugeMatrix,
    /// Certified distance between the value and the true optimum.
    pub gap: f64,
}

struct GaugeProblem {
    r: usize,
    d: usize,
    b0: Vec<CMat>,
    /// l[m][j] = −i Σ_i (E_m)_ji K_i.
    l: Vec<Vec<CMat>>,
}

impl GaugeProblem {
    fn new(ch: &OneParamChannel) -> Self {
        let ops = ch.ops();
        let r = ops.len();
        let d = ch.dim();
        let mi = C64::new(0.0, -1.0);
        let l = hermitian_basis(r)
            .iter()
            .map(|e| {
                (0..r)
                    .map(|j| (0..r).fold(CMat::zeros(d, d), |acc, i| acc + &ops[i] * (mi * e[(j, i)])))
                    .collect()
            })
            .collect();
        Self { r, d, b0: ch.derivs(), l }
    }

    fn nparams(&self) -> usize {
        self.r * self.r
    }

    fn b(&self, x: &DVector<f64>) -> Vec<CMat> {
        let mut b = self.b0.clone();
        for (m, lm) in self.l.iter().enumerate() {
            if x[m] != 0.0 {
                for (bj, lmj) in b.iter_mut().zip(lm) {
                    *bj += lmj * cr(x[m]);
                }
            }
        }
        b
    }

    fn alpha(&self, x: &DVector<f64>) -> CMat {
        let d = self.d;
        self.b(x).iter().fold(CMat::zeros(d, d), |acc, bj| acc + bj.adjoint() * bj)
    }

    fn max_eig(&self, x: &DVector<f64>) -> f64 {
        let (vals, _) = eigh(&self.alpha(x));
        vals[vals.len() - 1]
    }

    /// μ·log Tr exp(α/μ), its gradient, and the soft-max density.
    fn smooth(&self, x: &DVector<f64>, mu: f64) -> (f64, DVector<f64>, CMat) {
        let b = self.b(x);
        let a = b.iter().fold(CMat::zeros(self.d, self.d), |acc, bj| acc + bj.adjoint() * bj);
        let (vals, vecs) = eigh(&a);
        let top = vals[vals.len() - 1];
        let w: Vec<f64> = vals.iter().map(|&v| ((v - top) / mu).exp()).collect();
        let z: f64 = w.iter().sum();
        let f = top + mu * z.ln();
        let dens = CMat::from_diagonal(&DVector::from_iterator(w.len(), w.iter().map(|&x| cr(x / z))));
        let p = &vecs * dens * vecs.adjoint();
        let pb: Vec<CMat> = b.iter().map(|bj| &p * bj.adjoint()).collect();
        let grad = DVector::from_fn(self.nparams(), |m, _| {
            2.0 * self.l[m].iter().zip(&pb).map(|(lmj, pbj)| (pbj * lmj).trace().re).sum::<f64>()
        });
        (f, grad, p)
    }

    /// min_x Tr(ρ α(x)) for ρ = S S†, by real linear least squares.
    fn inner_min(&self, s: &CMat) -> (f64, DVector<f64>) {
        let k = s.ncols();
        let per = self.d * k;
        let rows = 2 * self.r * per;
        let flatten = |mats: &[CMat]| -> DVector<f64> {
            let mut out = DVector::zeros(rows);
            for (j, mj) in mats.iter().enumerate() {
                let ms = mj * s;
                for (t, z) in ms.iter().enumerate() {
                    out[2 * (j * per + t)] = z.re;
                    out[2 * (j * per + t) + 1] = z.im;
                }
            }
            out
        };
        let rhs = -flatten(&self.b0);
        let mut a = DMatrix::zeros(rows, self.nparams());
        for (m, lm) in self.l.iter().enumerate() {
            a.set_column(m, &flatten(lm));
        }
        // nalgebra's SVD of this tall, rank-deficient matrix loses digits on
        // some inputs, so solve the normal equations on the numerical range
        // of AᵀA and polish with a few refinement sweeps.
        let eig = (a.transpose() * &a).symmetric_eigen();
        let lmax = eig.eigenvalues.iter().fold(0.0f64, |x, &y| x.max(y));
        let cut = 1e-14 * lmax.max(1e-300);
        let solve = |r: &DVector<f64>| -> DVector<f64> {
            let atr = a.transpose() * r;
            let mut x = DVector::zeros(self.nparams());
            for (i, &lam) in eig.eigenvalues.iter().enumerate() {
                if lam > cut {
                    let v = eig.eigenvectors.column(i);
                    x += v * (v.dot(&atr) / lam);
                }
            }
            x
        };
        let mut x = solve(&rhs);
        for _ in 0..3 {
            let r = &rhs - &a * &x;
            x += solve(&r);
        }
        let resid = &a * &x - &rhs;
        (resid.norm_squared(), x)
    }
}

pub fn channel_qfi_ancilla(ch: &OneParamChannel) -> Result<ChannelQfi> {
    channel_qfi_ancilla_seeded(ch, DEFAULT_SEED)
}

/// Ancilla-assisted channel QFI with 10 random restarts drawn from `seed`.
pub fn channel_qfi_ancilla_seeded(ch: &OneParamChannel, seed: u64) -> Result<ChannelQfi> {
    let prob = GaugeProblem::new(ch);
    let n = prob.nparams();
    let zero = DVector::zeros(n);
    let scale = prob.max_eig(&zero);
    if scale <= 1e-300 {
        return Ok(ChannelQfi { value: 0.0, h_opt: GaugeMatrix::zero(prob.r), gap: 0.0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best_upper = f64::INFINITY;
    let mut best_x = zero.clone();
    let mut best_lower = 0.0f64;
    for _ in 0..10 {
        let x0 = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal) * scale.sqrt());
        let (upper, x, lower) = minimize_from(&prob, x0, scale);
        if upper < best_upper {
            best_upper = upper;
            best_x = x;
        }
        best_lower = best_lower.max(lower);
    }
    let gap = (best_upper - best_lower).max(0.0);
    if gap > 1e-9 * best_upper.max(1e-6 * scale) {
        return Err(Error::NonConvergence { best: 4.0 * best_upper, gap: 4.0 * gap });
    }
    let h_opt = GaugeMatrix::from_params(best_x.as_slice(), prob.r);
    Ok(ChannelQfi { value: 4.0 * best_upper, h_opt, gap: 4.0 * gap })
}

/// One continuation run; returns (primal value, minimizer, dual lower bound).
fn minimize_from(prob: &GaugeProblem, x0: DVector<f64>, scale: f64) -> (f64, DVector<f64>, f64) {
    let mut x = x0;
    let mut mu = 0.1 * scale;
    // Every stage's soft-max density is a dual candidate: at small μ it
    // collapses onto one eigenvector even when the optimum needs a mixture.
    let mut lower = f64::NEG_INFINITY;
    let mut xd = x.clone();
    while mu >= 1e-13 * scale {
        let m = mu;
        let (xn, _) = bfgs(|y| {
            let (f, g, _) = prob.smooth(y, m);
            (f, g)
        }, x, 400, 1e-13 * scale);
        x = xn;
        let p = prob.smooth(&x, mu).2;
        let (lo, xs) = prob.inner_min(&psd_sqrt(&hermitian_part(&p)));
        if lo > lower {
            lower = lo;
            xd = xs;
        }
        mu *= 0.1;
    }
    let (up_primal, up_dual) = (prob.max_eig(&x), prob.max_eig(&xd));
    if up_dual < up_primal {
        (up_dual, xd, lower)
    } else {
        (up_primal, x, lower)
    }
}

/// The objective ‖α(h)‖ for a given gauge (convex in h).
pub fn gauge_objective(ch: &OneParamChannel, h: &GaugeMatrix) -> Result<f64> {
    let prob = GaugeProblem::new(ch);
    if h.dim() != prob.r {
        return Err(Error::DimensionMismatch { expected: prob.r, found: h.dim() });
    }
    let x = gauge_params(h);
    Ok(prob.max_eig(&x))
}

fn gauge_params(h: &GaugeMatrix) -> DVector<f64> {
    let r = h.dim();
    let m = h.matrix();
    let mut x = Vec::with_capacity(r * r);
    for i in 0..r {
        x.push(m[(i, i)].re);
    }
    for i in 0..r {
        for j in i + 1..r {
            x.push(m[(i, j)].re);
            x.push(m[(i, j)].im);
        }
    }
    DVector::from_vec(x)
}

/// 4·min_h Tr(ρ α(h)): the QFI of (E_θ ⊗ 𝟙) applied to a purification of ρ.
pub fn purified_output_qfi(ch: &OneParamChannel, rho: &CMat) -> Result<f64> {
    if rho.shape() != (ch.dim(), ch.dim()) {
        return Err(Error::DimensionMismatch { expected: ch.dim(), found: rho.nrows() });
    }
    let prob = GaugeProblem::new(ch);
    Ok(4.0 * prob.inner_min(&psd_sqrt(&hermitian_part(rho))).0)
}

fn pure_input(theta: f64, phi: f64) -> CMat {
    CMat::from_column_slice(2, 1, &[cr((theta / 2.0).cos()), C64::from_polar((theta / 2.0).sin(), phi)])
}

/// Best ancilla-free QFI and the Bloch vector of the optimal pure input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoAncillaQfi {
    pub value: f64,
    pub input: Vector3<f64>,
}

pub fn channel_qfi_no_ancilla(ch: &OneParamChannel) -> Result<f64> {
    channel_qfi_no_ancilla_detail(ch).map(|r| r.value)
}

/// Coarse sphere grid, then compass search from the best grid points.
pub fn channel_qfi_no_ancilla_detail(ch: &OneParamChannel) -> Result<NoAncillaQfi> {
    if ch.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: ch.dim() });
    }
    let prob = GaugeProblem::new(ch);
    let g = |th: f64, ph: f64| 4.0 * prob.inner_min(&pure_input(th, ph)).0;
    let (nt, np) = (12usize, 24usize);
    let (dt, dp) = (std::f64::consts::PI / nt as f64, 2.0 * std::f64::consts::PI / np as f64);
    let mut grid = Vec::new();
    for i in 0..=nt {
        for j in 0..np {
            let (th, ph) = (i as f64 * dt, j as f64 * dp);
            grid.push((g(th, ph), th, ph));
        }
    }
    grid.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = grid[0];
    for &(v0, th0, ph0) in grid.iter().take(4) {
        let (mut v, mut th, mut ph) = (v0, th0, ph0);
        let mut step = dt;
        while step > 1e-9 {
            let mut moved = false;
            for (a, b) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)] {
                let (t2, p2) = (th + a * step, ph + b * step);
                let v2 = g(t2, p2);
                if v2 > v {
                    (v, th, ph) = (v2, t2, p2);
                    moved = true;
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        if v > best.0 {
            best = (v, th, ph);
        }
    }
    let (v, th, ph) = best;
    let input = Vector3::new(th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos());
    Ok(NoAncillaQfi { value: v, input })
}

/// Largest singular value of T: the trace-norm contraction coefficient.
pub fn eta_bound(ptm: &PauliTransferMap) -> f64 {
    ptm.singular_values()[0]
}

/// Largest sampled QFI ratio F(N(σ_θ))/F(σ_θ) over random one-parameter states.
pub fn eta_estimate(ptm: &PauliTransferMap, trials: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for _ in 0..trials {
        let v = random_unit(&mut rng) * (0.99 * rng.random::<f64>().cbrt());
        let dv = random_unit(&mut rng);
        let Ok(fin) = qfi_bloch(&BlochState { v, dv }) else { continue };
        if fin <= 0.0 {
            continue;
        }
        let out = BlochState { v: ptm.apply(&v), dv: ptm.mat * dv };
        if let Ok(fout) = qfi_bloch(&out) {
            best = best.max(fout / fin);
        }
    }
    best
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}
