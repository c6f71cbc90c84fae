//! Estimation of single-qubit channels under restricted controls.

pub mod bounds;
pub mod channel;
pub mod error;
pub mod fisher;
mod optimize;
pub mod protocols;
pub mod qubit;
pub mod random;

pub use bounds::{
    bloch_inequality_check, bounded_ancilla_factor, contractive_bound, derivative_ceiling, extension_bound,
    extension_bound_family, nonunital_gauge, rgnks_violated_bound, unital_gauge, BlochInequality, BoundReport,
    ExtensionStep,
};
pub use channel::{
    canonical_pauli_form, classify, dephasing_channel, depolarizing_kraus, hnks_check, kraus_span, rgnks_check,
    rotated_depolarizing, solve_h_annihilating, CanonicalPauliForm, ChannelClass, ChannelTag, DephasingFamily,
    HnksReport, KrausPair, KrausSpan, OneParamChannel, CLASSIFY_TOL,
};
pub use error::{Error, Result};
pub use fisher::{
    bures_distance, channel_qfi_ancilla, channel_qfi_ancilla_seeded, channel_qfi_no_ancilla, classical_fi,
    eta_bound, eta_estimate, povm_fi, qfi_bloch, qfi_state, sld, ChannelQfi, ClassicalFi, GaugeMatrix, Povm,
    QfiValue,
};
pub use protocols::{
    comparison_row, comparison_table, qec_analytic, qec_repetition_sim, repeated_measurement, simulate_sequence,
    spam_fi, sql_asymptotic, sql_protocol, ComparisonParams, ComparisonRow, ControlSequence, ProtocolResult,
    SqlParams, SqlVariant,
};
pub use qubit::{
    bloch_to_density, choi_from_kraus, choi_from_ptm, density_to_bloch, kraus_from_choi, ptm_from_kraus,
    validate_cptp, BlochState, CMat, DensityState, HermitianOp, KrausSet, PauliTransferMap, C64,
};
