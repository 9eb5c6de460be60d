//! Finite representations and approximation oracles for Borel probability
//! measures on Cantor space.
//!
//! A measure is determined by its cylinder masses: a function on strings with
//! mass 1 at the empty string and `value(s) = value(s0) + value(s1)`
//! everywhere. [`CylinderAssignment`] stores such a function exactly to a
//! finite depth together with a declared extension below it;
//! [`MeasureOracle`] is the evaluation contract (exact, or correct to
//! `2^-n`).

mod assignment;
mod metric;
mod modulus;
mod oracle;

pub use assignment::{CylinderAssignment, ExtensionPolicy};
pub use metric::{metric_dn, metric_dp};
pub use modulus::continuity_modulus;
pub use oracle::{FiniteRationalMeasure, FiniteTree, MeasureOracle, PeriodicPoint};

use crate::bits::BitString;

/// Errors from measure construction, evaluation, and the metric/modulus
/// operations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MeasureError {
    #[error("operation requires an exact oracle")]
    NotExact,
    #[error("query at {sigma:?} lies below the assignment depth (extension: stop)")]
    BelowDepth { sigma: BitString },
    #[error("root mass is {value}, expected 1/1")]
    RootMassNotOne { value: crate::rational::Rational },
    #[error("additivity fails at {sigma:?}")]
    AdditivityViolation { sigma: BitString },
    #[error("value at {sigma:?} is outside [0, 1]")]
    ValueOutOfRange { sigma: BitString },
    #[error("missing value for {sigma:?}")]
    MissingValue { sigma: BitString },
    #[error("duplicate value for {sigma:?}")]
    DuplicateValue { sigma: BitString },
    #[error("bernoulli parameter must satisfy 0 < p < 1")]
    BernoulliParameter,
    #[error("periodic point needs a nonempty period")]
    EmptyPeriod,
    #[error("weight at {sigma:?} must be positive")]
    NonpositiveWeight { sigma: BitString },
    #[error("weights must sum to 1")]
    WeightSum,
    #[error("mixture needs at least one component")]
    EmptyMixture,
    #[error("tree is not prefix-closed at {sigma:?}")]
    NotPrefixClosed { sigma: BitString },
    #[error("tree node {sigma:?} lies beyond the declared depth")]
    NodeBeyondDepth { sigma: BitString },
    #[error("tree has no child of {sigma:?} within its depth")]
    DeadNode { sigma: BitString },
    #[error("epsilon must be positive")]
    NonpositiveEpsilon,
    #[error("no level up to {max_depth} has all cylinder masses within the bound")]
    NotContinuousWithin { max_depth: u32 },
    #[error("comparison at {sigma:?} undecided at the available precision")]
    Indecisive { sigma: BitString },
    #[error("depth {depth} exceeds the enumeration limit of {limit}")]
    DepthLimit { depth: usize, limit: usize },
}
