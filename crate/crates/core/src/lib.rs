//! Scoring rules and evaluation machinery for sequential, cost-sensitive
//! multiclass search.
//!
//! The central object is a pairwise-additive scoring rule derived from the
//! expected cost of optimal sequential search: classes are tested in
//! descending order of probability-to-cost ratio until the true class is
//! found. Under a `Beta(alpha, 1)` prior on per-class unit costs this
//! expected cost has a closed form, and the `alpha = 1` unit-cost member is
//! the normalized regret score implemented by
//! [`scoring::pandora_regret`].
//!
//! Modules:
//!
//! - [`scoring`] — the closed-form pairwise loss family, the normalized
//!   regret score, the weighted Beta score, and the raw expected-cost
//!   affine identities.
//! - [`search`] — a deterministic sequential-search simulator with
//!   realized-cost accounting and effective-cost transforms for imperfect
//!   tests.
//! - [`baselines`] — log loss, accuracy, and macro-F1 together with their
//!   decision-model identities (parallel decisions, fixed-order search,
//!   greedy F1 marginals).
//! - [`verify`] — Monte Carlo expected-cost oracles, Bayes-risk grid scans
//!   for (strict) propriety, and gradient checks.
//! - [`suites`] — named verification suites combining the above into
//!   machine-checkable pass/fail reports.
//! - [`ranking`] — synthetic model zoos, evaluation conditions, Kendall's
//!   tau, and the ranking meta-evaluation harness.
//!
//! The crate is `no_std`-compatible (with `alloc`); the default `std`
//! feature simply routes float math through the standard library instead
//! of `libm`. All randomized routines take explicit 64-bit seeds and use a
//! named generator (ChaCha12) so results are reproducible bit-for-bit.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod baselines;
mod math;
pub mod ranking;
pub mod sampling;
pub mod scoring;
pub mod search;
pub mod suites;
pub mod verify;

use alloc::string::String;
use core::fmt;

/// Probabilities are clamped to at least this value before any ratio is
/// formed, without renormalizing. This extends every score to boundary
/// forecasts while keeping logarithms finite.
pub const PROB_CLAMP: f64 = 1e-12;

/// Clamp a probability away from zero per the engine-wide policy.
#[inline]
pub fn clamp_prob(p: f64) -> f64 {
    if p < PROB_CLAMP {
        PROB_CLAMP
    } else {
        p
    }
}

/// Errors shared by all modules.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    Domain(String),
    /// Structurally inconsistent inputs (dimension mismatches, bad
    /// parameter combinations).
    Config(String),
    /// The operation is not defined for the requested parameters.
    Unsupported(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::Unsupported(msg) => write!(f, "unsupported operation: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamp_leaves_interior_probabilities_alone() {
        assert_eq!(clamp_prob(0.3), 0.3);
        assert_eq!(clamp_prob(1.0), 1.0);
        assert_eq!(clamp_prob(0.0), PROB_CLAMP);
        assert_eq!(clamp_prob(1e-15), PROB_CLAMP);
    }
}
