//! Fully adaptive differential-privacy accounting.
//!
//! This crate tracks the privacy cost of a composed sequence of mechanisms
//! whose parameters may be chosen adaptively, round by round, from earlier
//! outputs. Its central object is the *intrinsic time* `v = Σ ε_m²` of the
//! composition, through which everything else is expressed:
//!
//! - [`filter`]: a stopping rule over declared parameters guaranteeing the
//!   stopped composition is (ε, δ)-DP, matching advanced composition's rate
//!   while both mechanisms and parameters are chosen adaptively;
//! - [`odometer`]: families of upper bounds on accumulated privacy loss that
//!   hold at *all* rounds simultaneously with probability ≥ 1 - δ;
//! - [`boundaries`]: the underlying time-uniform martingale concentration
//!   boundaries, plus a simulation validator;
//! - [`mechanism`]: worst-case privacy-loss samplers (randomized response,
//!   Gaussian/zCDP) and adaptive adversary strategies;
//! - [`montecarlo`]: coverage experiments that empirically certify every
//!   high-probability claim the accountant makes.
//!
//! The accountant never touches data: it sees declared `(ε, δ)` parameters
//! only, which is exactly why its stopping decisions are computable by the
//! analyst.

pub mod boundaries;
pub mod error;
pub mod filter;
pub mod mechanism;
pub mod montecarlo;
pub mod odometer;
pub mod spend;
pub mod stats;
pub mod trials;

pub use error::{Error, Result};
pub use filter::{EpsDelta, FilterConfig, FilterDecision};
pub use montecarlo::{CoverageReport, ExperimentConfig, ExperimentOutcome, Guard, Mechanism};
pub use odometer::{OdometerFamily, OdometerSpec, OdometerValue};
pub use spend::{CompositionState, PrivacySpend, SpendKind};
