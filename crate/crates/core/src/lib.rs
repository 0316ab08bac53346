//! Evaluation of one-shot insurance contracts under three decision criteria:
//! the rate of change of expected wealth, the rate of change of expected
//! utility, and the time-average growth rate of wealth under multiplicative
//! repetition.
//!
//! The crate is organised bottom-up:
//!
//! - [`gamble`]: ventures, contracts, parties and the discrete gambles they face.
//! - [`paradigms`]: the three rate evaluators over a [`gamble::Gamble`].
//! - [`fee_solver`]: break-even fees and the win-win fee interval.
//! - [`montecarlo`]: seeded simulation of multiplicative repetition and ruin estimates.
//! - [`asymptotics`]: the large-wealth limit of the insurer's growth rate.
//! - [`scenario`]: scenario files, tables, sweeps and CSV output used by the CLI.

// `!(x > 0.0)` rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod fee_solver;
pub mod gamble;
pub mod montecarlo;
pub mod paradigms;
pub mod scenario;

pub use error::{Error, Result};
pub use gamble::{ContractTerms, Gamble, Outcome, PartyState, Role, VentureSpec};
pub use paradigms::{EvaluationReport, Paradigm, RateValue, Units, UtilityFunction};
