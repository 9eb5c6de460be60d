//! Exact-arithmetic measures on Cantor space.
//!
//! Everything here works over finite binary strings and exact rationals: no
//! floating point anywhere. The crate provides
//!
//! * bit strings, the prefix order, and the `2^-|lcp|` metric ([`bits`],
//!   [`cantor`]);
//! * finite-depth cylinder representations of Borel probability measures,
//!   approximation oracles, the measure metric `d_P`, and continuity moduli
//!   ([`measures`]);
//! * a threshold-tree locator for atoms of a measure ([`atoms`]);
//! * measure transformations: rationalization to dyadic measures, transport
//!   of a continuous measure onto the uniform one, image measures under
//!   monotone functionals, continuity repair, and an interval-constraint
//!   solver over cylinder masses ([`transforms`]);
//! * finite Martin-Löf test levels with exact budget verification, coverage,
//!   pullback, and tree-indexed combination ([`mltests`]);
//! * the settling-time real of a finite enumeration and the explicit test
//!   levels that cover it under any continuous measure ([`settling`]).
//!
//! All values are immutable and all operations are pure. With the default
//! `parallel` feature, level-wide sweeps run on rayon; results are identical
//! to the sequential fallback (`--no-default-features`) because every
//! reduction is an exact, associative rational sum.

pub mod atoms;
pub mod bits;
pub mod cantor;
pub mod exec;
pub mod measures;
pub mod mltests;
pub mod rational;
pub mod settling;
pub mod textio;
pub mod transforms;

pub use bits::BitString;
pub use rational::{DyadicRational, Rational};
