//! Error taxonomy. Exit-code mapping in the CLI leans on these variants:
//! schema/usage problems, verification failures, and blown resource budgets
//! are distinguishable without string matching.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Matrix shapes or vector lengths do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// An operation required full row rank and did not get it.
    #[error("rank-deficient input: {0}")]
    RankDeficient(String),

    /// A claimed sublattice/subgroup relation fails; the witness is a row
    /// or vector that falls outside the alleged superobject.
    #[error("containment violated: {0}")]
    NotContained(String),

    /// A documented hypothesis of a theorem-backed operation fails.
    /// The failing predicate is named so callers can report it verbatim.
    #[error("hypothesis failed: {0}")]
    Hypothesis(String),

    /// Invalid parameter (even p, zero dimension, bad twist index, ...).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A search or enumeration exceeded its node budget.
    #[error("resource budget exhausted: {0}")]
    Resource(String),

    /// Two independent routes that must agree did not; this is a bug trap,
    /// not a user error, and is never silently downgraded.
    #[error("internal consistency check failed: {0}")]
    Inconsistency(String),
}
