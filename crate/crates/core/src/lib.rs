//! Single-shot converse bounds for secret key agreement, oblivious transfer,
//! bit commitment and secure computation over finite joint distributions,
//! with an exact evaluator for small interactive protocols.

// negated comparisons reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod hyptest;
pub mod numeric;
pub mod prob;
pub mod protosim;
pub mod smooth;
pub mod structure;

pub use error::{Error, Result};
pub use hyptest::{beta_epsilon, beta_epsilon_iid, BetaCertificate};
pub use prob::{Alphabet, Channel, JointDist, MassFunction, SubDist, Var};
pub use smooth::SmoothingResult;
pub use structure::{Labeling, Partition};

/// Crate version, embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
