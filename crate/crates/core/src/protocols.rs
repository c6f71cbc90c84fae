//! Sequential protocols on the Bloch ball: controlled dephasing sequences,
//! the SQL rotation scheme, repeated measurement, SPAM and the QEC benchmark.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};

use crate::channel::{dephasing_channel, DephasingFamily, OneParamChannel};
use crate::error::{Error, Result};
use crate::fisher::{povm_fi, qfi_bloch, qfi_matrices, Povm};
use crate::qubit::{bloch_to_density, cr, identity, kron, pauli, BlochState, CMat, PauliTransferMap};

/// Controls applied after each use of the channel.
#[derive(Debug, Clone, PartialEq)]
pub enum ControlSequence {
    Constant(PauliTransferMap),
    PerStep(Vec<PauliTransferMap>),
}

impl ControlSequence {
    pub fn constant(c: PauliTransferMap) -> Result<Self> {
        Ok(Self::Constant(c.validated()?))
    }

    pub fn per_step(cs: Vec<PauliTransferMap>) -> Result<Self> {
        let cs = cs.into_iter().map(PauliTransferMap::validated).collect::<Result<Vec<_>>>()?;
        Ok(Self::PerStep(cs))
    }

    pub fn identity() -> Self {
        Self::Constant(PauliTransferMap::identity())
    }

    /// Control after the k-th use (0-based).
    pub fn at(&self, k: usize) -> Option<&PauliTransferMap> {
        match self {
            Self::Constant(c) => Some(c),
            Self::PerStep(cs) => cs.get(k),
        }
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        match self {
            Self::Constant(c) => c.is_unital(tol),
            Self::PerStep(cs) => cs.iter().all(|c| c.is_unital(tol)),
        }
    }

    fn check_len(&self, n: usize) -> Result<()> {
        match self {
            Self::PerStep(cs) if cs.len() < n => Err(Error::DimensionMismatch { expected: n, found: cs.len() }),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolResult {
    pub n: usize,
    pub qfi_or_fi: f64,
    pub terminal: BlochState,
    /// States after each step, only when requested.
    pub trajectory: Option<Vec<BlochState>>,
    pub meta: Vec<(String, String)>,
}

impl ProtocolResult {
    /// CSV header matching [`ProtocolResult::csv_row`].
    pub const CSV_HEADER: &'static str = "protocol,n,parameters,qfi_or_fi";

    /// `protocol,n,parameters,qfi_or_fi` with parameters as `key=value`
    /// pairs joined by ';'.
    pub fn csv_row(&self, protocol: &str) -> String {
        let params: Vec<String> = self.meta.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{protocol},{},{},{:.16e}", self.n, params.join(";"), self.qfi_or_fi)
    }
}

fn step(
    t: &Vector3<f64>,
    mat: &Matrix3<f64>,
    dt: &Vector3<f64>,
    dmat: &Matrix3<f64>,
    c: &PauliTransferMap,
    s: &BlochState,
) -> BlochState {
    let v = t + mat * s.v;
    let dv = dt + dmat * s.v + mat * s.dv;
    BlochState { v: c.apply(&v), dv: c.mat * dv }
}

fn propagate(
    (t, mat, dt, dmat): (Vector3<f64>, Matrix3<f64>, Vector3<f64>, Matrix3<f64>),
    controls: &ControlSequence,
    v0: &BlochState,
    n: usize,
    record: bool,
) -> Result<(BlochState, Option<Vec<BlochState>>)> {
    controls.check_len(n)?;
    let mut s = *v0;
    let mut traj = record.then(|| Vec::with_capacity(n));
    for k in 0..n {
        let c = controls.at(k).expect("length checked");
        s = step(&t, &mat, &dt, &dmat, c, &s);
        if let Some(tr) = traj.as_mut() {
            tr.push(s);
        }
    }
    Ok((s, traj))
}

/// (t, T, ṫ, Ṫ).
type Maps = (Vector3<f64>, Matrix3<f64>, Vector3<f64>, Matrix3<f64>);

fn family_maps(fam: &DephasingFamily) -> Result<Maps> {
    fam.validate()?;
    Ok((Vector3::zeros(), fam.contraction(), Vector3::zeros(), fam.derivative_matrix()))
}

fn finish(n: usize, terminal: BlochState, trajectory: Option<Vec<BlochState>>) -> Result<ProtocolResult> {
    Ok(ProtocolResult { n, qfi_or_fi: qfi_bloch(&terminal)?, terminal, trajectory, meta: Vec::new() })
}

/// QFI of the Bloch vector after n rounds of dephasing followed by a control.
pub fn simulate_sequence(
    fam: &DephasingFamily,
    controls: &ControlSequence,
    v0: &BlochState,
    n: usize,
) -> Result<ProtocolResult> {
    let (s, _) = propagate(family_maps(fam)?, controls, v0, n, false)?;
    finish(n, s, None)
}

/// As [`simulate_sequence`], keeping every intermediate state.
pub fn simulate_sequence_traced(
    fam: &DephasingFamily,
    controls: &ControlSequence,
    v0: &BlochState,
    n: usize,
) -> Result<ProtocolResult> {
    let (s, tr) = propagate(family_maps(fam)?, controls, v0, n, true)?;
    finish(n, s, tr)
}

/// Same propagation for any qubit channel family, through its transfer map.
pub fn simulate_channel_sequence(
    ch: &OneParamChannel,
    controls: &ControlSequence,
    v0: &BlochState,
    n: usize,
) -> Result<ProtocolResult> {
    let ptm = ch.ptm()?;
    let (dt, dmat) = ch.ptm_derivative()?;
    let (s, _) = propagate((ptm.t, ptm.mat, dt, dmat), controls, v0, n, false)?;
    finish(n, s, None)
}

/// Which generator component the rotation scheme accumulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SqlVariant {
    G0X,
    G0Y,
    G1X,
    G1Y,
}

impl SqlVariant {
    pub const ALL: [SqlVariant; 4] = [SqlVariant::G0X, SqlVariant::G0Y, SqlVariant::G1X, SqlVariant::G1Y];

    fn uses_g1(self) -> bool {
        matches!(self, SqlVariant::G1X | SqlVariant::G1Y)
    }

    fn axis(self) -> Vector3<f64> {
        match self {
            SqlVariant::G0X | SqlVariant::G1X => Vector3::x(),
            SqlVariant::G0Y | SqlVariant::G1Y => Vector3::y(),
        }
    }

    /// Tr(G·V) for the generator and axis this variant uses.
    pub fn signal(self, fam: &DephasingFamily) -> f64 {
        let g = if self.uses_g1() { fam.g1 } else { fam.g0 };
        2.0 * g.dot(&self.axis())
    }
}

impl fmt::Display for SqlVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SqlVariant::G0X => "G0X",
            SqlVariant::G0Y => "G0Y",
            SqlVariant::G1X => "G1X",
            SqlVariant::G1Y => "G1Y",
        })
    }
}

impl FromStr for SqlVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "G0X" => Ok(SqlVariant::G0X),
            "G0Y" => Ok(SqlVariant::G0Y),
            "G1X" => Ok(SqlVariant::G1X),
            "G1Y" => Ok(SqlVariant::G1Y),
            _ => Err(Error::Validation(format!("unknown SQL variant {s:?}"))),
        }
    }
}

/// exp(−iφV/2), preceded by Z for the G1 variants.
pub fn sql_control(variant: SqlVariant, phi: f64) -> PauliTransferMap {
    let r = PauliTransferMap::rotation(&variant.axis(), phi);
    if variant.uses_g1() {
        let z = PauliTransferMap::new(Vector3::zeros(), Matrix3::from_diagonal(&Vector3::new(-1.0, -1.0, 1.0)));
        z.then(&r)
    } else {
        r
    }
}

fn sql_run(fam: &DephasingFamily, n: usize, w: f64, variant: SqlVariant, v0: &BlochState) -> Result<ProtocolResult> {
    if variant.signal(fam).abs() <= 1e-12 {
        return Err(Error::NotApplicable(format!("Tr(G V) vanishes for variant {variant}")));
    }
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::Domain(format!("w must be positive, got {w}")));
    }
    let phi = if n == 0 { 0.0 } else { (w / n as f64).sqrt() };
    let controls = ControlSequence::Constant(sql_control(variant, phi));
    let mut r = simulate_sequence(fam, &controls, v0, n)?;
    r.meta = vec![("variant".into(), variant.to_string()), ("phi".into(), format!("{phi:.16e}"))];
    Ok(r)
}

fn check_z0(z0: f64) -> Result<()> {
    if !(z0 > 0.0 && z0 <= 1.0) {
        return Err(Error::Domain(format!("z0 must lie in (0, 1], got {z0}")));
    }
    Ok(())
}

/// Rotation scheme with φ = √(w/n) from v0 = (0, 0, z0).
pub fn sql_protocol(fam: &DephasingFamily, n: usize, w: f64, variant: SqlVariant, z0: f64) -> Result<ProtocolResult> {
    check_z0(z0)?;
    sql_run(fam, n, w, variant, &BlochState::fixed(Vector3::new(0.0, 0.0, z0))?)
}

/// Large-n slope of [`sql_protocol`], QFI/n.
pub fn sql_asymptotic(fam: &DephasingFamily, w: f64, variant: SqlVariant, z0: f64) -> Result<f64> {
    fam.validate()?;
    check_z0(z0)?;
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::Domain(format!("w must be positive, got {w}")));
    }
    let p = fam.p;
    let r = if variant.uses_g1() { p / (1.0 - p) } else { (1.0 - p) / p };
    let tr = variant.signal(fam);
    Ok(r * r * w / ((r * w).exp() / (z0 * z0) - 1.0) * tr * tr)
}

/// n/interval independent runs of `interval` uninterrupted uses, each read
/// out optimally; leftover uses are dropped.
pub fn repeated_measurement(fam: &DephasingFamily, n: usize, interval: usize, v0: &BlochState) -> Result<ProtocolResult> {
    if interval == 0 {
        return Err(Error::Domain("measurement interval must be at least 1".into()));
    }
    let block = simulate_sequence(fam, &ControlSequence::identity(), v0, interval)?;
    let runs = n / interval;
    Ok(ProtocolResult {
        n,
        qfi_or_fi: runs as f64 * block.qfi_or_fi,
        terminal: block.terminal,
        trajectory: None,
        meta: vec![
            ("interval".into(), interval.to_string()),
            ("runs".into(), runs.to_string()),
            ("dropped".into(), (n % interval).to_string()),
        ],
    })
}

/// Parameters of the rotation scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqlParams {
    pub n: usize,
    pub w: f64,
    pub variant: SqlVariant,
}

/// Classical FI of the rotation scheme when |0⟩ is prepared with flip
/// probability q and read out in Z with the same flip probability.
pub fn spam_fi(fam: &DephasingFamily, params: &SqlParams, q: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&q) {
        return Err(Error::Domain(format!("SPAM error must lie in [0, 1/2], got {q}")));
    }
    let v0 = BlochState::fixed(Vector3::new(0.0, 0.0, 1.0 - 2.0 * q))?;
    let r = sql_run(fam, params.n, params.w, params.variant, &v0)?;
    povm_fi(&bloch_to_density(&r.terminal)?, &Povm::noisy_z_readout(q)?)
}

/// Exact simulation of the two-qubit repetition code under the dephased
/// X rotation, with a syndrome-based recovery after every use.
pub fn qec_repetition_sim(p: f64, n: usize) -> Result<ProtocolResult> {
    let fam = DephasingFamily::dephased_rotation(p, Vector3::x())?;
    let ch = dephasing_channel(&fam)?.tensor_identity()?;
    let psi = CMat::from_column_slice(4, 1, &[cr(0.5), cr(0.5), cr(0.5), cr(-0.5)]);
    let mut rho = &psi * psi.adjoint();
    let mut drho = CMat::zeros(4, 4);
    let id4 = identity(4);
    let xz = kron(&pauli(1), &pauli(3));
    let pp = (&id4 + &xz) * cr(0.5);
    let pm = (&id4 - &xz) * cr(0.5);
    let zi = kron(&pauli(3), &identity(2));
    let flip = &zi * &pm;
    let recover = |m: &CMat| &pp * m * &pp + &flip * m * flip.adjoint();
    for _ in 0..n {
        let (r, d) = ch.apply(&rho, &drho);
        rho = recover(&r);
        drho = recover(&d);
    }
    let q = qfi_matrices(&rho, &drho);
    Ok(ProtocolResult {
        n,
        qfi_or_fi: q.value,
        terminal: BlochState::zero_ket(),
        trajectory: None,
        meta: vec![("p".into(), format!("{p:.16e}"))],
    })
}

/// 4(1 − 2p)²n².
pub fn qec_analytic(p: f64, n: usize) -> f64 {
    let a = 1.0 - 2.0 * p;
    4.0 * a * a * (n as f64).powi(2)
}

/// Settings for the protocol comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonParams {
    pub p: f64,
    pub w: f64,
    pub spam: Vec<f64>,
    pub interval: usize,
}

impl Default for ComparisonParams {
    fn default() -> Self {
        Self { p: 0.1, w: 0.01, spam: vec![0.0, 0.001, 0.02], interval: 6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub n: usize,
    pub qec: f64,
    /// One entry per SPAM level.
    pub sql: Vec<f64>,
    pub repeated: f64,
    pub no_control: f64,
}

/// QEC, rotation scheme (per SPAM level), repeated measurement and the
/// uncontrolled sequence for the dephased X rotation at a given n.
pub fn comparison_row(params: &ComparisonParams, n: usize) -> Result<ComparisonRow> {
    let fam = DephasingFamily::dephased_rotation(params.p, Vector3::x())?;
    let sp = SqlParams { n, w: params.w, variant: SqlVariant::G0X };
    let sql = params.spam.iter().map(|&q| spam_fi(&fam, &sp, q)).collect::<Result<Vec<_>>>()?;
    let v0 = BlochState::zero_ket();
    Ok(ComparisonRow {
        n,
        qec: qec_analytic(params.p, n),
        sql,
        repeated: repeated_measurement(&fam, n, params.interval, &v0)?.qfi_or_fi,
        no_control: simulate_sequence(&fam, &ControlSequence::identity(), &v0, n)?.qfi_or_fi,
    })
}

pub fn comparison_table(params: &ComparisonParams, ns: &[usize]) -> Result<Vec<ComparisonRow>> {
    ns.iter().map(|&n| comparison_row(params, n)).collect()
}
