//! The level metrics `d_n` and the measure metric `d_P`.

use super::{MeasureError, MeasureOracle};
use crate::bits::BitString;
use crate::exec;
use crate::rational::Rational;

/// `d_n(mu, nu) = 1/2 * sum over |sigma| = n of |mu(sigma) - nu(sigma)|`,
/// computed exactly. Both oracles must be exact.
///
/// The sweep prunes subtrees where either oracle vanishes: by additivity the
/// absolute differences below such a node sum to the other oracle's mass
/// there, so point masses cost linear work instead of `2^n`.
pub fn metric_dn(
    mu: &MeasureOracle,
    nu: &MeasureOracle,
    n: u32,
) -> Result<Rational, MeasureError> {
    if !mu.is_exact() || !nu.is_exact() {
        return Err(MeasureError::NotExact);
    }
    let mut half = level_difference(mu, nu, &BitString::empty(), n as usize)?;
    half.halve();
    Ok(half)
}

fn level_difference(
    mu: &MeasureOracle,
    nu: &MeasureOracle,
    sigma: &BitString,
    n: usize,
) -> Result<Rational, MeasureError> {
    let a = mu.value(sigma, 0)?;
    let b = nu.value(sigma, 0)?;
    if sigma.len() == n {
        return Ok((a - b).abs());
    }
    if b.is_zero() {
        return Ok(a);
    }
    if a.is_zero() {
        return Ok(b);
    }
    let split = n - sigma.len() >= exec::JOIN_DEPTH;
    let (left, right) = exec::join(
        split,
        || level_difference(mu, nu, &sigma.child(false), n),
        || level_difference(mu, nu, &sigma.child(true), n),
    );
    Ok(left? + right?)
}

/// A rational within `2^-precision` of
/// `d_P(mu, nu) = sum over n >= 1 of 2^-n * d_n(mu, nu)`.
///
/// The series is truncated at `N = precision + 1`; since every `d_n` is at
/// most 1, the discarded tail is at most `2^-N`, so the partial sum is a
/// lower bound within the requested tolerance.
pub fn metric_dp(
    mu: &MeasureOracle,
    nu: &MeasureOracle,
    precision: u32,
) -> Result<Rational, MeasureError> {
    let mut total = Rational::zero();
    for n in 1..=precision + 1 {
        total += &(Rational::pow2_neg(n) * metric_dn(mu, nu, n)?);
    }
    Ok(total)
}
