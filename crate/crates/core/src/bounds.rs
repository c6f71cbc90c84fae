//! Upper bounds on the QFI of sequential strategies: the channel-extension
//! recursion with explicit gauges, and closed-form constant ceilings.

use std::fmt::Write as _;

use crate::channel::{dephasing_channel, rgnks_check, DephasingFamily, OneParamChannel};
use crate::error::{Error, Result};
use crate::fisher::{channel_qfi_no_ancilla, eta_bound, GaugeMatrix};
use crate::qubit::{
    apply_kraus, cr, hermitian_part, identity, pauli, pauli_traces, trace_norm, CMat, HermitianOp, KrausSet,
    PauliTransferMap, C64,
};

/// One control C_k together with the gauge used for E_θ at that step.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionStep {
    pub control: KrausSet,
    pub gauge: GaugeMatrix,
}

impl ExtensionStep {
    pub fn new(control: KrausSet, gauge: GaugeMatrix) -> Result<Self> {
        if control.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: control.dim() });
        }
        Ok(Self { control, gauge })
    }

    /// Lifts a transfer map to Kraus form through its Choi matrix.
    pub fn from_ptm(control: &PauliTransferMap, gauge: GaugeMatrix) -> Result<Self> {
        let ks = control.validated()?.to_kraus()?;
        Self::new(ks, gauge)
    }

    pub fn identity(gauge: GaugeMatrix) -> Self {
        Self { control: KrausSet::new(vec![identity(2)]).expect("identity"), gauge }
    }
}

/// Per-step terms of the extension bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub n: usize,
    pub total: f64,
    /// 4·Tr(ι_{k−1} α_k) for k = 1..n.
    pub alpha_terms: Vec<f64>,
    /// 8·Tr(γ̲_k β_{k+1}) for k = 1..n−1.
    pub cross_terms: Vec<f64>,
    /// Trace norms ‖γ̲_k‖₁ for k = 1..n.
    pub gamma_norms: Vec<f64>,
}

impl BoundReport {
    /// Columns k, alpha_term, cross_term, gamma_norm, running_total. The cross
    /// term on row k is 8·Tr(γ̲_k β_{k+1}) (zero on the last row).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,alpha_term,cross_term,gamma_norm,running_total\n");
        let mut running = 0.0;
        for k in 0..self.n {
            let cross = self.cross_terms.get(k).copied().unwrap_or(0.0);
            running += self.alpha_terms[k] + cross;
            let _ = writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{:.16e}",
                k + 1,
                self.alpha_terms[k],
                cross,
                self.gamma_norms[k],
                running
            );
        }
        out
    }
}

/// Σ_k 4Tr(ι_{k−1}α_k) + Σ_k 8Tr(γ̲_k β_{k+1}), an upper bound on the
/// ancilla-assisted QFI of C_n∘E_θ∘⋯∘C_1∘E_θ.
pub fn extension_bound(ch: &OneParamChannel, steps: &[ExtensionStep]) -> Result<BoundReport> {
    if steps.is_empty() {
        return Err(Error::Validation("extension bound needs at least one step".into()));
    }
    if ch.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: ch.dim() });
    }
    let ops = ch.ops();
    let i = C64::new(0.0, 1.0);
    let mut iota = identity(2);
    let mut gamma = CMat::zeros(2, 2);
    let n = steps.len();
    let mut alpha_terms = Vec::with_capacity(n);
    let mut cross_terms = Vec::with_capacity(n.saturating_sub(1));
    let mut gamma_norms = Vec::with_capacity(n);
    for (k, step) in steps.iter().enumerate() {
        let kd = ch.gauged_derivs(&step.gauge)?;
        let alpha = kd.iter().fold(CMat::zeros(2, 2), |acc, d| acc + d.adjoint() * d);
        let beta = hermitian_part(&(ops.iter().zip(&kd).fold(CMat::zeros(2, 2), |acc, (k, d)| acc + k.adjoint() * d) * i));
        alpha_terms.push(4.0 * (&iota * &alpha).trace().re);
        if k > 0 {
            cross_terms.push(8.0 * (&gamma * &beta).trace().re);
        }
        let x = ops.iter().zip(&kd).fold(CMat::zeros(2, 2), |acc, (k, d)| acc + d * &iota * k.adjoint() * i);
        let beta_under = step.control.apply(&hermitian_part(&x));
        gamma = step.control.apply(&apply_kraus(&ops, &gamma)) + beta_under;
        iota = step.control.apply(&apply_kraus(&ops, &iota));
        gamma_norms.push(trace_norm(&gamma));
    }
    let total = alpha_terms.iter().sum::<f64>() + cross_terms.iter().sum::<f64>();
    Ok(BoundReport { n, total, alpha_terms, cross_terms, gamma_norms })
}

pub fn extension_bound_family(fam: &DephasingFamily, steps: &[ExtensionStep]) -> Result<BoundReport> {
    extension_bound(&dephasing_channel(fam)?, steps)
}

/// β̲ before the control is applied, for the natural dephasing Kraus pair.
pub fn beta_under(fam: &DephasingFamily, gauge: &GaugeMatrix, iota: &CMat) -> Result<HermitianOp> {
    let ch = dephasing_channel(fam)?;
    let kd = ch.gauged_derivs(gauge)?;
    let i = C64::new(0.0, 1.0);
    let x = ch.ops().iter().zip(&kd).fold(CMat::zeros(2, 2), |acc, (k, d)| acc + d * iota * k.adjoint() * i);
    HermitianOp::new(hermitian_part(&x))
}

/// The gauge with h00 = h11 = 0 that makes β̲ traceless and Z-orthogonal
/// under unital controls.
pub fn unital_gauge(fam: &DephasingFamily) -> GaugeMatrix {
    let p = fam.p;
    let h01 = -((1.0 - p) * 2.0 * fam.g0[2] + p * 2.0 * fam.g1[2]) / (4.0 * (p * (1.0 - p)).sqrt());
    let mut h = CMat::zeros(2, 2);
    h[(0, 1)] = cr(h01);
    h[(1, 0)] = cr(h01);
    GaugeMatrix::new(h).expect("real symmetric")
}

/// The gauge that keeps β̲ traceless and Z-orthogonal when the accumulated
/// image of the identity, ι, is not maximally mixed.
pub fn nonunital_gauge(fam: &DephasingFamily, iota_prev: &HermitianOp) -> Result<GaugeMatrix> {
    fam.validate()?;
    if iota_prev.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: iota_prev.dim() });
    }
    let p = fam.p;
    let iota = iota_prev.matrix();
    let z = (iota * pauli(3)).trace().re / 2.0;
    if z.abs() >= 1.0 {
        return Err(Error::Domain(format!("|Tr(iota Z)/2| = {} is not below 1", z.abs())));
    }
    let a = pauli_traces(iota) * 0.5;
    let (gp, gm) = (fam.g_plus(), fam.g_minus());
    // Tr(ι G)/2 = a·g and Tr(G Z)/2 = g_z for G = g·σ.
    let g_plus = a.dot(&gp) - gp[2] * z;
    let g_minus = a.dot(&gm) - gm[2] * z;
    let c1 = -g_plus / (1.0 - z * z);
    let h01 = (z * g_plus / (1.0 - z * z) - gp[2]) / (2.0 * (p * (1.0 - p)).sqrt());
    let c3 = -g_minus - gm[2] * z;
    let h00 = (c1 + c3) / (2.0 * (1.0 - p));
    let h11 = (c1 - c3) / (2.0 * p);
    let h = CMat::from_row_slice(2, 2, &[cr(h00), cr(h01), cr(h01), cr(h11)]);
    GaugeMatrix::new(h)
}

/// (Tr(G−Z)² + 4ṗ²)/(p²(1−p)²): the QFI ceiling when G0, G1 ∝ Z.
pub fn rgnks_violated_bound(fam: &DephasingFamily) -> Result<f64> {
    fam.validate()?;
    if rgnks_check(fam, 1e-12) {
        return Err(Error::NotApplicable("G0 or G1 has a component off the Z axis".into()));
    }
    Ok(4.0 * derivative_ceiling(fam))
}

/// (Tr(G−Z)² + 4ṗ²)/(4p²(1−p)²): the ceiling on ‖v̇_n‖² when G0, G1 ∝ Z.
pub fn derivative_ceiling(fam: &DephasingFamily) -> f64 {
    let p = fam.p;
    let tz = 2.0 * fam.g_minus()[2];
    (tz * tz + 4.0 * fam.pdot * fam.pdot) / (4.0 * p * p * (1.0 - p) * (1.0 - p))
}

/// F(E_θ)/(1 − √η)² with η the trace-norm contraction coefficient, which
/// upper-bounds the QFI contraction coefficient; the ceiling is therefore
/// valid but looser than one built from the exact coefficient.
pub fn contractive_bound(ch: &OneParamChannel) -> Result<f64> {
    let eta = eta_bound(&ch.ptm()?);
    if eta >= 1.0 - 1e-9 {
        return Err(Error::NotApplicable(format!("channel is not strictly contractive (eta = {eta})")));
    }
    let f = channel_qfi_no_ancilla(ch)?;
    Ok(f / (1.0 - eta.sqrt()).powi(2))
}

/// ‖t‖² against (1 − σ_min(T)²)(1 − ‖T‖²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochInequality {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

pub fn bloch_inequality_check(ptm: &PauliTransferMap) -> BlochInequality {
    let sv = ptm.singular_values();
    let lhs = ptm.t.norm_squared();
    let rhs = (1.0 - sv[2] * sv[2]) * (1.0 - sv[0] * sv[0]);
    BlochInequality { holds: lhs <= rhs + 1e-10, lhs, rhs }
}

/// Multiplier 2^{n_A} on the unital-control bound when n_A noiseless ancilla
/// qubits are available.
pub fn bounded_ancilla_factor(ancilla_qubits: u32) -> f64 {
    2f64.powi(ancilla_qubits as i32)
}
