//! Measure transformations.
//!
//! * [`rationalize`] — replace an exact measure by a nearby strictly positive
//!   dyadic one, deterministically.
//! * [`transport_map`] — build the order-preserving level map that carries a
//!   positive dyadic assignment onto the uniform measure, up to `2^-n` per
//!   cylinder.
//! * [`image_measure`] / [`continuity_repair`] — push a measure forward
//!   through a monotone functional, optionally re-spreading mass whose
//!   preimages are discovered incompatible with an inverse candidate.
//! * [`build_constraints`] / [`constraint_measure`] — the interval-constraint
//!   system a measure must satisfy to dominate a pullback along one
//!   functional while staying non-atomic along the other, and a deterministic
//!   solver for it.

mod constraints;
mod functional;
mod image;
mod rationalize;
mod transport;

pub use constraints::{build_constraints, constraint_measure, ConstraintRecord, ConstraintSystem};
pub use functional::MonotoneFunctional;
pub use image::{continuity_repair, image_measure};
pub use rationalize::rationalize;
pub use transport::transport_map;

use crate::bits::BitString;
use crate::measures::MeasureError;

/// Errors from functional validation and the transformation operations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("use bound decreases at output length {level}")]
    UseDecreases { level: usize },
    #[error("table at output length {level} must cover all {expected} inputs, found {found}")]
    WrongTableWidth {
        level: usize,
        expected: usize,
        found: usize,
    },
    #[error("output for {input:?} at output length {level} is shorter than {level} bits")]
    OutputTooShort { input: BitString, level: usize },
    #[error("monotonicity fails: output of {shorter:?} is not a prefix of the output of {longer:?}")]
    NonMonotone {
        shorter: BitString,
        longer: BitString,
    },
    #[error("functional has no table at output length {needed_level}")]
    TooShallow { needed_level: usize },
    #[error("assignment value at {sigma:?} is not dyadic")]
    NotDyadic { sigma: BitString },
    #[error("assignment value at {sigma:?} is zero; transport needs strictly positive values")]
    NotPositive { sigma: BitString },
    #[error("no level within the assignment depth has all values at most 2^-{index}")]
    ModulusUnavailable { index: u32 },
    #[error("no feasible assignment at the grid resolution; witness {sigma:?}")]
    Infeasible { sigma: BitString },
}
