//! Continuity modulus: the least level at which every cylinder mass sits
//! below a bound.

use super::{MeasureError, MeasureOracle};
use crate::bits::BitString;
use crate::rational::Rational;

/// How far past the natural starting precision an approximate comparison may
/// escalate before giving up as [`MeasureError::Indecisive`].
const ESCALATION: u32 = 8;

/// Certified comparison of `mu(sigma)` against `epsilon`.
///
/// For exact oracles this is a plain comparison. For approximate ones the
/// value is queried at increasing precision `n'`; the cylinder passes when
/// `value + 2^-n' <= epsilon`, fails when `value - 2^-n' > epsilon`, and the
/// comparison is abandoned once `n'` exceeds the starting precision by 8.
fn exceeds(
    mu: &MeasureOracle,
    sigma: &BitString,
    epsilon: &Rational,
) -> Result<bool, MeasureError> {
    if mu.is_exact() {
        return Ok(&mu.value(sigma, 0)? > epsilon);
    }
    // start where the tolerance first drops to epsilon
    let mut start = 1u32;
    while &Rational::pow2_neg(start) > epsilon && start < 128 {
        start += 1;
    }
    for precision in start..=start + ESCALATION {
        let tol = Rational::pow2_neg(precision);
        let g = mu.value(sigma, precision)?;
        if &(&g + &tol) <= epsilon {
            return Ok(false);
        }
        if &(&g - &tol) > epsilon {
            return Ok(true);
        }
    }
    Err(MeasureError::Indecisive {
        sigma: sigma.clone(),
    })
}

/// The least level `l <= max_depth` such that every cylinder of length `l`
/// has mass at most `epsilon`; [`MeasureError::NotContinuousWithin`] if no
/// such level exists up to `max_depth`.
///
/// Only the subtree of cylinders exceeding `epsilon` is explored: masses are
/// monotone along extension, so a cylinder at or below the bound screens off
/// its whole subtree. That set has width less than `1/epsilon` per level,
/// which keeps the search shallow even when `max_depth` is large.
pub fn continuity_modulus(
    mu: &MeasureOracle,
    epsilon: &Rational,
    max_depth: u32,
) -> Result<u32, MeasureError> {
    if epsilon.is_zero() || epsilon.is_negative() {
        return Err(MeasureError::NonpositiveEpsilon);
    }
    let mut deepest_violation: Option<u32> = None;
    let mut stack = vec![BitString::empty()];
    while let Some(sigma) = stack.pop() {
        if !exceeds(mu, &sigma, epsilon)? {
            continue;
        }
        let level = sigma.len() as u32;
        if level == max_depth {
            return Err(MeasureError::NotContinuousWithin { max_depth });
        }
        if deepest_violation.is_none_or(|d| level > d) {
            deepest_violation = Some(level);
        }
        stack.push(sigma.child(true));
        stack.push(sigma.child(false));
    }
    Ok(deepest_violation.map_or(0, |d| d + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::PeriodicPoint;
    use crate::rational::DyadicRational;

    fn dy(s: &str) -> DyadicRational {
        s.parse().unwrap()
    }

    #[test]
    fn lebesgue_moduli() {
        let l = MeasureOracle::lebesgue();
        assert_eq!(
            continuity_modulus(&l, &Rational::pow2_neg(3), 20).unwrap(),
            3
        );
        assert_eq!(
            continuity_modulus(&l, &Rational::new(1, 5), 20).unwrap(),
            3
        );
        assert_eq!(continuity_modulus(&l, &Rational::one(), 20).unwrap(), 0);
        assert_eq!(continuity_modulus(&l, &Rational::new(2, 1), 20).unwrap(), 0);
    }

    #[test]
    fn dirac_is_not_continuous() {
        let d = MeasureOracle::dirac(PeriodicPoint::all_zeros());
        assert_eq!(
            continuity_modulus(&d, &Rational::new(1, 2), 20),
            Err(MeasureError::NotContinuousWithin { max_depth: 20 })
        );
    }

    #[test]
    fn nonpositive_epsilon_is_rejected() {
        let l = MeasureOracle::lebesgue();
        assert_eq!(
            continuity_modulus(&l, &Rational::zero(), 5),
            Err(MeasureError::NonpositiveEpsilon)
        );
    }

    #[test]
    fn modulus_is_nondecreasing_for_continuous_constructors() {
        let measures = [
            MeasureOracle::lebesgue(),
            MeasureOracle::bernoulli(dy("1/4")).unwrap(),
        ];
        for mu in &measures {
            let mut last = 0;
            for n in 0..=8 {
                let l = continuity_modulus(mu, &Rational::pow2_neg(n), 64).unwrap();
                assert!(l >= last, "modulus decreased at n = {n}");
                last = l;
            }
        }
    }

    #[test]
    fn general_rational_epsilon() {
        // bernoulli(1/4): level-l maximum is (3/4)^l
        let b = MeasureOracle::bernoulli(dy("1/4")).unwrap();
        let eps = Rational::new(1, 24);
        // (3/4)^11 = 177147/4194304 ~ 0.0422 > 1/24; (3/4)^12 ~ 0.0317 <= 1/24
        assert_eq!(continuity_modulus(&b, &eps, 64).unwrap(), 12);
    }

    #[test]
    fn approximate_oracle_certifies_or_reports_indecision() {
        // approximation of lebesgue that truncates to the 2^-n grid
        let approx = MeasureOracle::from_fn(false, |s, n| {
            let exact = Rational::pow2_neg(s.len() as u32);
            let grid = exact.grid_floor(n);
            Ok(Rational::from_big(grid, num::BigInt::from(1) << n as usize))
        });
        assert_eq!(
            continuity_modulus(&approx, &Rational::new(1, 5), 20).unwrap(),
            3
        );

        // an oracle pinned at exactly epsilon can never be certified
        let stuck = MeasureOracle::from_fn(false, |_s, _n| Ok(Rational::new(1, 3)));
        assert!(matches!(
            continuity_modulus(&stuck, &Rational::new(1, 3), 4),
            Err(MeasureError::Indecisive { .. })
        ));
    }
}
