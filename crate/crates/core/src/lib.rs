//! Exact-arithmetic toolkit for lattices sandwiched between `(sqrt(2) A_{p-1})^d`
//! and its dual.
//!
//! The discriminant group of `N = sqrt(2) A_{p-1}` is `Z_2^{p-1} x Z_p`, so every
//! intermediate lattice is cut out by a pair of codes: a binary code measured
//! against the mod-2 Cartan pairing and a p-ary code measured against `-2ab mod p`.
//! This crate builds those lattices with unbounded integer arithmetic, pushes the
//! Coxeter rotation through them, and computes the orbifold data the construction
//! exists for: radicals of twisted cocycles, twisted-sector dimensions, exact
//! quantum dimensions, and irreducible-module counts. A small q-series layer
//! reproduces the same quantum dimensions numerically from S-transformed
//! characters, so the algebra can be checked against analysis.
//!
//! Everything upstream of [`qseries`] evaluation is exact: `BigInt` matrices,
//! `BigRational` Gram data, and Hermite/Smith normal forms with deterministic
//! conventions. Floats appear only when a series is evaluated at a point.

pub mod cocycle;
pub mod codes;
pub mod error;
pub mod isometry;
pub mod lattice;
pub mod linalg;
pub mod orbifold;
pub mod qseries;
pub mod verify;

pub use error::Error;

/// Default node budget for enumerations (lattice vectors, code searches).
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Decrementing node counter shared by all exhaustive searches. Exceeding it
/// aborts with [`Error::Resource`] rather than stalling.
#[derive(Debug)]
pub struct Budget {
    remaining: u64,
}

impl Budget {
    /// `None` selects [`DEFAULT_BUDGET`].
    pub fn new(limit: Option<u64>) -> Self {
        Budget { remaining: limit.unwrap_or(DEFAULT_BUDGET) }
    }

    /// Spend one node; errors once the budget is gone.
    pub fn charge(&mut self, what: &str) -> Result<()> {
        if self.remaining == 0 {
            return Err(Error::Resource(format!("node budget exhausted during {what}")));
        }
        self.remaining -= 1;
        Ok(())
    }
}

/// Unbounded integer scalar used everywhere exactness matters.
pub type Int = num_bigint::BigInt;
/// Exact rational scalar; Gram matrices, norms, and weights live here.
pub type Rat = num_rational::BigRational;

/// Shorthand for fallible operations in this crate.
pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn int(v: i64) -> Int {
    Int::from(v)
}

pub(crate) fn rat(n: i64, d: i64) -> Rat {
    Rat::new(Int::from(n), Int::from(d))
}
