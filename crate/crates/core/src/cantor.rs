//! The Cantor metric on finite prefixes and prefix-free reduction.

use crate::bits::BitString;
use crate::rational::Rational;
use std::collections::BTreeSet;

/// The two prefixes agree up to their common length and no equality was
/// declared, so the distance of the underlying reals is undetermined.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("ambiguous prefixes {x:?} and {y:?}: one extends the other and equality was not declared")]
pub struct AmbiguousPrefix {
    pub x: BitString,
    pub y: BitString,
}

/// Distance `2^-|lcp|` between the reals represented by the prefixes `x` and
/// `y`, or `0` when the caller declares the reals equal.
///
/// The prefixes decide the distance only if they disagree somewhere within
/// their common length; otherwise the result is [`AmbiguousPrefix`].
pub fn cantor_distance(
    x: &BitString,
    y: &BitString,
    declared_equal: bool,
) -> Result<Rational, AmbiguousPrefix> {
    if declared_equal {
        return Ok(Rational::zero());
    }
    let lcp = BitString::longest_common_prefix(x, y);
    if lcp.len() == x.len().min(y.len()) {
        // No disagreement observed: x ⊑ y or y ⊑ x.
        return Err(AmbiguousPrefix {
            x: x.clone(),
            y: y.clone(),
        });
    }
    Ok(Rational::pow2_neg(lcp.len() as u32))
}

/// The minimal elements of `set` under the prefix order.
///
/// The induced open set is unchanged: every element of the input extends some
/// element of the output.
pub fn prefix_free_reduce(set: &BTreeSet<BitString>) -> BTreeSet<BitString> {
    let mut out = BTreeSet::new();
    let mut last_kept: Option<BitString> = None;
    // In the sorted order a prefix precedes all of its extensions, and any
    // kept prefix of sigma is the most recently kept element.
    for sigma in set {
        if let Some(prev) = &last_kept {
            if prev.is_prefix_of(sigma) {
                continue;
            }
        }
        out.insert(sigma.clone());
        last_kept = Some(sigma.clone());
    }
    out
}

/// Total mass `sum 2^-|sigma|` of the open set named by a prefix-free set.
pub fn antichain_lebesgue_mass(set: &BTreeSet<BitString>) -> Rational {
    set.iter()
        .map(|s| Rational::pow2_neg(s.len() as u32))
        .sum()
}
