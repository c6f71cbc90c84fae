//! Subcommand bodies. Each returns the text to write to the output sink.

use std::fmt::Write as _;

use qmetro::protocols::sql_control;
use qmetro::{
    channel_qfi_ancilla_seeded, channel_qfi_no_ancilla, classify, comparison_row, extension_bound_family, hnks_check,
    qec_repetition_sim, repeated_measurement, rgnks_check, simulate_sequence, spam_fi, sql_protocol, unital_gauge,
    BlochState, ComparisonParams, ControlSequence, ExtensionStep, KrausSet, SqlParams, CLASSIFY_TOL,
};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ProtocolKind};
use crate::error::{CliError, Result};

pub const SWEEP_HEADER: &str = "protocol,n,p,w,q,interval,value";

const HNKS_TOL: f64 = 1e-9;
const RGNKS_TOL: f64 = 1e-12;

fn verdict(holds: bool) -> &'static str {
    if holds {
        "holds"
    } else {
        "violated"
    }
}

/// Class tag and the HNKS/RGNKS verdicts. RGNKS is reported only for the
/// dephasing family, where it is defined.
pub fn classify_report(cfg: &ExperimentConfig) -> Result<String> {
    let ch = cfg.channel_family()?;
    let class = classify(&ch.ptm()?, CLASSIFY_TOL)?;
    let hnks = hnks_check(&ch, HNKS_TOL);
    let mut out = format!("{}; HNKS: {}", class.tag, verdict(hnks.holds));
    if cfg.channel.is_none() {
        let _ = write!(out, "; RGNKS: {}", verdict(rgnks_check(&cfg.dephasing()?, RGNKS_TOL)));
    }
    let sv = class.singular_values;
    let _ = write!(
        out,
        "\nsingular values: {:.16e}, {:.16e}, {:.16e}\nHNKS residual: {:.16e}\n",
        sv[0], sv[1], sv[2], hnks.residual
    );
    Ok(out)
}

/// Channel QFI with and without a noiseless ancilla.
pub fn qfi_report(cfg: &ExperimentConfig) -> Result<String> {
    let ch = cfg.channel_family()?;
    let anc = channel_qfi_ancilla_seeded(&ch, cfg.seed)?;
    let plain = channel_qfi_no_ancilla(&ch)?;
    Ok(format!(
        "quantity,value\nchannel_qfi_ancilla,{:.16e}\nchannel_qfi_ancilla_gap,{:.16e}\nchannel_qfi_no_ancilla,{:.16e}\n",
        anc.value, anc.gap, plain
    ))
}

/// Extension bound for the unital control sequence of the configured
/// protocol, one row per n.
pub fn bound_table(cfg: &ExperimentConfig) -> Result<String> {
    let fam = cfg.dephasing()?;
    let pr = &cfg.protocol;
    let variant = pr.variant()?;
    let gauge = unital_gauge(&fam);
    let ns = cfg.n.values()?;
    let rows: Vec<Result<(usize, f64)>> = ns
        .par_iter()
        .map(|&n| {
            if n == 0 {
                return Ok((0, 0.0));
            }
            let control = match pr.kind {
                ProtocolKind::Sql | ProtocolKind::Spam => sql_control(variant, (pr.w / n as f64).sqrt()).to_kraus()?,
                ProtocolKind::NoControl => KrausSet::new(vec![qmetro::qubit::identity(2)])?,
                other => {
                    return Err(CliError::Domain(format!(
                        "bound needs a unital control sequence; protocol {} has none",
                        other.name()
                    )))
                }
            };
            let steps = vec![ExtensionStep::new(control, gauge.clone())?; n];
            Ok((n, extension_bound_family(&fam, &steps)?.total))
        })
        .collect();
    let mut out = String::from("n,bound,bound_per_use\n");
    for row in rows {
        let (n, b) = row?;
        let per = if n == 0 { 0.0 } else { b / n as f64 };
        let _ = writeln!(out, "{n},{b:.16e},{per:.16e}");
    }
    Ok(out)
}

fn sweep_value(cfg: &ExperimentConfig, n: usize) -> Result<f64> {
    let fam = cfg.dephasing()?;
    let pr = &cfg.protocol;
    let v0 = BlochState::zero_ket();
    let value = match pr.kind {
        ProtocolKind::Sql => sql_protocol(&fam, n, pr.w, pr.variant()?, pr.z0)?.qfi_or_fi,
        ProtocolKind::Spam => spam_fi(&fam, &SqlParams { n, w: pr.w, variant: pr.variant()? }, pr.q)?,
        ProtocolKind::Repeated => repeated_measurement(&fam, n, pr.interval, &v0)?.qfi_or_fi,
        ProtocolKind::NoControl => simulate_sequence(&fam, &ControlSequence::identity(), &v0, n)?.qfi_or_fi,
        ProtocolKind::Qec => qec_repetition_sim(fam.p, n)?.qfi_or_fi,
    };
    Ok(value)
}

/// One row per n for the configured protocol.
pub fn sweep_table(cfg: &ExperimentConfig) -> Result<String> {
    let ns = cfg.n.values()?;
    let values: Vec<Result<f64>> = ns.par_iter().map(|&n| sweep_value(cfg, n)).collect();
    let pr = &cfg.protocol;
    let mut out = format!("{SWEEP_HEADER}\n");
    for (n, v) in ns.iter().zip(values) {
        let _ = writeln!(
            out,
            "{},{n},{:.16e},{:.16e},{:.16e},{},{:.16e}",
            pr.kind.name(),
            cfg.family.p,
            pr.w,
            pr.q,
            pr.interval,
            v?
        );
    }
    Ok(out)
}

/// Log-spaced n from 1 to n_max, twenty points per decade.
pub fn log_grid(n_max: usize) -> Vec<usize> {
    let decades = (n_max as f64).log10();
    let steps = (20.0 * decades).ceil() as usize;
    let mut ns: Vec<usize> = (0..=steps)
        .map(|i| 10f64.powf(decades * i as f64 / steps.max(1) as f64).round() as usize)
        .map(|n| n.clamp(1, n_max))
        .collect();
    ns.dedup();
    ns
}

/// The strategy comparison: QEC, the rotation scheme at each SPAM level,
/// repeated measurement and no control, one row per n.
pub fn figure2_table(cfg: &ExperimentConfig) -> Result<String> {
    let f2 = &cfg.figure2;
    let params = ComparisonParams { p: f2.p, w: f2.w, spam: f2.q_list.clone(), interval: f2.interval };
    let ns = if cfg.n.is_empty() { log_grid(f2.n_max) } else { cfg.n.values()? };
    let rows: Vec<Result<qmetro::ComparisonRow>> = ns.par_iter().map(|&n| Ok(comparison_row(&params, n)?)).collect();
    let mut cols = vec!["n".to_string(), "qec_analytic".to_string()];
    cols.extend(f2.q_list.iter().map(|q| format!("sql_q{q}")));
    cols.push(format!("repeated_interval{}", f2.interval));
    cols.push("no_control".into());
    let mut out = format!(
        "# p={} w={} interval={}\n# gnuplot: set datafile separator ','; set key autotitle columnhead; \
         set logscale xy; plot for [c=2:{}] 'FILE' using 1:c with lines\n{}\n",
        f2.p,
        f2.w,
        f2.interval,
        cols.len(),
        cols.join(",")
    );
    for row in rows {
        let r = row?;
        let _ = write!(out, "{},{:.16e}", r.n, r.qec);
        for s in &r.sql {
            let _ = write!(out, ",{s:.16e}");
        }
        let _ = writeln!(out, ",{:.16e},{:.16e}", r.repeated, r.no_control);
    }
    Ok(out)
}
