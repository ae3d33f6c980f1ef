//! Auction mechanisms for sponsored clarifying questions.
//!
//! A platform with a single ad slot may first show the user one of several
//! sponsored follow-up questions. The user's reaction is a public signal that
//! sharpens everyone's belief about the user's latent intent before the slot
//! is allocated. This crate implements, in exact rational arithmetic, the two
//! competing designs for that pipeline and the analysis machinery that
//! separates them:
//!
//! * [`model`] — the Bayesian instance (states, prior, signal channels,
//!   advertisers) and its posterior arithmetic.
//! * [`direct`] — the end-to-end mechanism: one round of bids drives the
//!   question choice, the signal-contingent allocation and VCG externality
//!   payments. Truthful and welfare-optimal.
//! * [`modular`] — decoupled two-stage mechanisms: a question auction (VCG,
//!   first-price or all-pay) followed by a per-signal second-price ad
//!   auction, plus the prescribed equilibrium profile and the proxy variant.
//! * [`analysis`] — an independent welfare oracle, deviation search for
//!   equilibrium verification, price-of-anarchy reports, and generators for
//!   the named instance families used by the test-suite.
//! * [`cli`] — document formats and report rendering for the
//!   `suggestion-auctions` binary.
//!
//! All core computation is generic over a [`Scalar`]; the exact [`Rat`]
//! instantiation is the default everywhere and the only one the CLI uses.
//! `f64` satisfies the same trait for quick approximate experiments, at the
//! cost of the exact tie and threshold semantics the analysis relies on.

pub mod analysis;
pub mod cli;
pub mod direct;
pub mod model;
pub mod modular;
pub mod scalar;

use thiserror::Error;

pub use direct::TiePolicy;
pub use scalar::Scalar;

/// Exact rational scalar used by the CLI and the test-suite.
pub type Rat = num_rational::BigRational;

/// Exact-arithmetic instance.
pub type ExactInstance = model::Instance<Rat>;
/// Exact-arithmetic reduced game.
pub type ExactGame = model::ReducedGame<Rat>;

/// Errors produced by lookups and mechanism preconditions.
///
/// Invariant violations in instance data are not errors; they are returned
/// as values by the `validate` operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown question `{0}`")]
    UnknownQuestion(String),
    #[error("unknown signal `{signal}` for question `{question}`")]
    UnknownSignal { question: String, signal: String },
    #[error("advertiser index {index} out of range (instance has {count})")]
    AdvertiserIndex { index: usize, count: usize },
    #[error("unknown advertiser `{0}`")]
    UnknownAdvertiser(String),
    #[error("signal `{signal}` of question `{question}` has zero probability; the posterior is undefined")]
    ZeroMeasureSignal { question: String, signal: String },
    #[error("expected {expected} bids, got {got}")]
    BidArity { expected: usize, got: usize },
    #[error("negative bid for advertiser index {0}")]
    NegativeBid(usize),
    #[error("strategy profile is incomplete: missing {0}")]
    IncompleteProfile(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
}

pub type Result<T> = std::result::Result<T, Error>;
