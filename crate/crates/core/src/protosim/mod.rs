//! Exact evaluation of small interactive protocols: secret-key security,
//! the converse test construction, privacy amplification, and the OT and BC
//! reductions to key agreement.

mod bc;
mod exec;
mod fuzz;
mod hash;
mod json;
mod ot;
mod protocol;
mod security;

pub use bc::{check_bc_reduction, empty_bc_protocol, measure_bc, otp_bc_protocol, reduce_bc_to_sk, BcMeasurement, BcProtocol, BcReductionReport};
pub use exec::{Execution, State};
pub use fuzz::{fuzz, random_instance, FuzzConfig, FuzzSummary};
pub use hash::{bit_len, conditional_h_min, hash_distance, leftover_hash, HashReport, Toeplitz, SEED_TRIALS};
pub use json::{bc_file, ot_file, BcJson, MessageJson, OtJson, OutputJson, PartyJson, ProtocolFile, Row};
pub use ot::{
    check_ot_reduction, ideal_ot_protocol, measure_ot, ot_correlation, reduce_ot_to_sk, OtMeasurement, OtProtocol, OtReductionReport,
    OtVariant, Reduction, RECEIVER, SENDER,
};
pub use protocol::{point, Layout, MessageSpec, OutputSpec, PartySpec, Protocol, ProtocolBuilder};
pub use security::{
    check_converse, eval_sk_security, interactive_independence_check, lemma1_test, ConverseReport, IndependenceReport, Lemma1Report,
    SecurityReport, CHECK_TOL,
};
