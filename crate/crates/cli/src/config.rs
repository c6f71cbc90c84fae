//! Experiment configuration in TOML. Keys are dotted by section, e.g.
//! `family.p`, `protocol.w`, `n.range`.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use qmetro::{dephasing_channel, rotated_depolarizing, DephasingFamily, OneParamChannel, PauliTransferMap, SqlVariant};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub family: FamilySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelSpec>,
    #[serde(default)]
    pub protocol: ProtocolSpec,
    #[serde(default)]
    pub n: NSpec,
    #[serde(default)]
    pub figure2: Figure2Spec,
}

/// Dephasing family: Pauli triples for G0 and G1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub p: f64,
    #[serde(default)]
    pub pdot: f64,
    pub g0: [f64; 3],
    pub g1: [f64; 3],
}

impl Default for FamilySpec {
    /// Dephasing followed by an X rotation at p = 0.1.
    fn default() -> Self {
        Self { p: 0.1, pdot: 0.0, g0: [1.0, 0.0, 0.0], g1: [-1.0, 0.0, 0.0] }
    }
}

impl FamilySpec {
    pub fn build(&self) -> Result<DephasingFamily> {
        Ok(DephasingFamily::new(self.p, self.pdot, Vector3::from(self.g0), Vector3::from(self.g1))?)
    }
}

/// A channel family other than the dephasing one, used by classify and qfi.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelSpec {
    /// Depolarizing with retention λ followed by a rotation about `axis`.
    Depolarizing { lambda: f64, axis: [f64; 3] },
    /// Fixed transfer map (t, T), optionally followed by e^{−iθ g·σ}.
    Ptm {
        t: [f64; 3],
        mat: [[f64; 3]; 3],
        #[serde(default)]
        generator: [f64; 3],
    },
}

impl ChannelSpec {
    pub fn build(&self) -> Result<OneParamChannel> {
        match self {
            ChannelSpec::Depolarizing { lambda, axis } => Ok(rotated_depolarizing(*lambda, &Vector3::from(*axis))?),
            ChannelSpec::Ptm { t, mat, generator } => {
                let m = Matrix3::from_fn(|i, j| mat[i][j]);
                let ptm = PauliTransferMap::new(Vector3::from(*t), m).validated()?;
                let ks = ptm.to_kraus()?;
                let g = qmetro::qubit::bloch_op(&Vector3::from(*generator)) * qmetro::C64::new(0.0, -1.0);
                let pairs = ks.ops().iter().map(|k| qmetro::KrausPair { op: k.clone(), deriv: &g * k }).collect();
                Ok(OneParamChannel::new(pairs)?)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    /// Rotation scheme, QFI of the output state.
    Sql,
    /// Rotation scheme read out in Z with SPAM flip rate q.
    Spam,
    Repeated,
    NoControl,
    Qec,
}

impl ProtocolKind {
    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::Sql => "sql",
            ProtocolKind::Spam => "spam",
            ProtocolKind::Repeated => "repeated",
            ProtocolKind::NoControl => "no_control",
            ProtocolKind::Qec => "qec",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSpec {
    pub kind: ProtocolKind,
    #[serde(default = "default_w")]
    pub w: f64,
    #[serde(default = "default_z0")]
    pub z0: f64,
    #[serde(default)]
    pub q: f64,
    #[serde(default = "default_interval")]
    pub interval: usize,
    #[serde(default = "default_variant")]
    pub variant: String,
}

fn default_w() -> f64 {
    0.01
}
fn default_z0() -> f64 {
    1.0
}
fn default_interval() -> usize {
    6
}
fn default_variant() -> String {
    "G0X".into()
}

impl Default for ProtocolSpec {
    fn default() -> Self {
        Self {
            kind: ProtocolKind::Sql,
            w: default_w(),
            z0: default_z0(),
            q: 0.0,
            interval: default_interval(),
            variant: default_variant(),
        }
    }
}

impl ProtocolSpec {
    pub fn variant(&self) -> Result<SqlVariant> {
        SqlVariant::from_str(&self.variant).map_err(|e| CliError::Config(format!("protocol.variant: {e}")))
    }
}

/// Either an explicit list or an inclusive range with a step.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub list: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<RangeSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: usize,
    pub end: usize,
    #[serde(default = "one")]
    pub step: usize,
}

fn one() -> usize {
    1
}

impl NSpec {
    pub fn is_empty(&self) -> bool {
        self.list.is_none() && self.range.is_none()
    }

    pub fn values(&self) -> Result<Vec<usize>> {
        match (&self.list, &self.range) {
            (Some(_), Some(_)) => Err(CliError::Config("n: give either n.list or n.range, not both".into())),
            (Some(l), None) => Ok(l.clone()),
            (None, Some(r)) => {
                if r.step == 0 {
                    return Err(CliError::Config("n.range.step must be at least 1".into()));
                }
                Ok((r.start..=r.end).step_by(r.step).collect())
            }
            (None, None) => Ok(Vec::new()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Figure2Spec {
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_w")]
    pub w: f64,
    #[serde(default = "default_q_list")]
    pub q_list: Vec<f64>,
    #[serde(default = "default_interval")]
    pub interval: usize,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
}

fn default_p() -> f64 {
    0.1
}
fn default_q_list() -> Vec<f64> {
    vec![0.0, 0.001, 0.02]
}
fn default_n_max() -> usize {
    1000
}

impl Default for Figure2Spec {
    fn default() -> Self {
        Self {
            p: default_p(),
            w: default_w(),
            q_list: default_q_list(),
            interval: default_interval(),
            n_max: default_n_max(),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(describe(text, &e)))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config types serialize to TOML")
    }

    /// Range checks against the library's preconditions. Structural problems
    /// surface as config errors, out-of-range numbers as domain errors.
    pub fn validate(&self) -> Result<()> {
        self.family.build()?;
        if let Some(ch) = &self.channel {
            ch.build()?;
        }
        self.protocol.variant()?;
        self.n.values()?;
        let pr = &self.protocol;
        let dom = |msg: String| Err(CliError::Domain(msg));
        if !(pr.w > 0.0 && pr.w.is_finite()) {
            return dom(format!("protocol.w must be positive, got {}", pr.w));
        }
        if !(pr.z0 > 0.0 && pr.z0 <= 1.0) {
            return dom(format!("protocol.z0 must lie in (0, 1], got {}", pr.z0));
        }
        if !(0.0..=0.5).contains(&pr.q) {
            return dom(format!("protocol.q must lie in [0, 1/2], got {}", pr.q));
        }
        if pr.interval == 0 {
            return dom("protocol.interval must be at least 1".into());
        }
        let f2 = &self.figure2;
        if !(f2.p > 0.0 && f2.p <= 0.5) {
            return dom(format!("figure2.p must lie in (0, 1/2], got {}", f2.p));
        }
        if !(f2.w > 0.0 && f2.w.is_finite()) {
            return dom(format!("figure2.w must be positive, got {}", f2.w));
        }
        if let Some(q) = f2.q_list.iter().find(|q| !(0.0..=0.5).contains(*q)) {
            return dom(format!("figure2.q_list entry {q} outside [0, 1/2]"));
        }
        if f2.interval == 0 || f2.n_max == 0 {
            return dom("figure2.interval and figure2.n_max must be at least 1".into());
        }
        Ok(())
    }

    pub fn dephasing(&self) -> Result<DephasingFamily> {
        self.family.build()
    }

    /// The explicit channel if one is configured, else the dephasing family.
    pub fn channel_family(&self) -> Result<OneParamChannel> {
        match &self.channel {
            Some(ch) => ch.build(),
            None => Ok(dephasing_channel(&self.family.build()?)?),
        }
    }
}

/// "line L, column C: message" from a TOML error.
fn describe(text: &str, e: &toml::de::Error) -> String {
    let msg = e.message().trim();
    match e.span() {
        Some(span) => {
            let before = &text[..span.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            format!("line {line}, column {col}: {msg}")
        }
        None => msg.to_string(),
    }
}
