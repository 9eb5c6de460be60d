//! Deterministic rationalization: a nearby strictly positive dyadic measure.

use super::TransformError;
use crate::exec;
use crate::measures::{CylinderAssignment, ExtensionPolicy, MeasureError, MeasureOracle};
use crate::rational::Rational;

/// Replace an exact measure by a dyadic assignment `nu` with
/// `mu(sigma) < 2·nu(sigma)` for every `sigma` up to `depth`, additive and
/// strictly positive everywhere.
///
/// At each node the child split ratio `q = nu(sigma0)/nu(sigma)` is chosen as
/// the dyadic of minimal exponent (then minimal mantissa) inside the open
/// window `(p - p·h, p + (1-p)·h)`, where `p` is the measure's own
/// conditional split (`1/2` where the parent mass vanishes) and
/// `h = 2^-(|sigma|+3)`. The windows are open and nonempty, so a dyadic
/// always exists and the construction never gets stuck; their widths sum to
/// less than `1/4` along any path, which keeps `nu` within a factor `3/4` of
/// `mu` and hence strictly above `mu/2`. A measure that is already dyadic
/// contains its own split ratio in every window and is reproduced exactly.
pub fn rationalize(
    mu: &MeasureOracle,
    depth: usize,
) -> Result<CylinderAssignment, TransformError> {
    if !mu.is_exact() {
        return Err(TransformError::Measure(MeasureError::NotExact));
    }
    let mut levels: Vec<Vec<Rational>> = vec![vec![Rational::one()]];
    let mut mu_levels: Vec<Vec<Rational>> = vec![vec![mu.exact_value(&crate::bits::BitString::empty())?]];
    for l in 0..depth {
        let parents = &levels[l];
        let mu_parents = &mu_levels[l];
        let mu_children = exec::try_map_level(l + 1, |s| mu.exact_value(s))?;
        let h = Rational::pow2_neg(l as u32 + 3);
        let pairs: Vec<(Rational, Rational)> = exec::map_ranks(1u64 << l, |r| {
            let parent = &parents[r as usize];
            let mu_parent = &mu_parents[r as usize];
            let mu_left = &mu_children[(2 * r) as usize];
            let p = if mu_parent.is_zero() {
                Rational::new(1, 2)
            } else {
                mu_left / mu_parent
            };
            let q = minimal_dyadic_in_window(&p, &h);
            let left = &q * parent;
            let right = parent - &left;
            (left, right)
        });
        let mut row = Vec::with_capacity(1 << (l + 1));
        for (a, b) in pairs {
            row.push(a);
            row.push(b);
        }
        levels.push(row);
        mu_levels.push(mu_children);
    }
    Ok(CylinderAssignment::new(levels, ExtensionPolicy::Uniform)?)
}

/// The dyadic of minimal exponent, then minimal mantissa, in the open window
/// `(p - p·h, p + (1-p)·h)`.
fn minimal_dyadic_in_window(p: &Rational, h: &Rational) -> Rational {
    let lo = p - &(p * h);
    let hi = p + &((Rational::one() - p) * h);
    for exponent in 0u32.. {
        // least grid point strictly above lo at this exponent
        let m = lo.grid_floor(exponent) + 1;
        let candidate = Rational::from_big(m, num::BigInt::from(1) << exponent as usize);
        if candidate < hi {
            return candidate;
        }
    }
    unreachable!("open window always contains a dyadic")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::{bs, BitString};
    use crate::measures::{ExtensionPolicy, FiniteTree};
    use crate::rational::DyadicRational;

    fn dy(s: &str) -> DyadicRational {
        s.parse().unwrap()
    }

    /// Depth-1 measure with masses 1/3 and 2/3.
    fn third_measure() -> MeasureOracle {
        MeasureOracle::from_fn(true, |s, _| {
            Ok(match s.to_string().as_str() {
                "" => Rational::one(),
                "0" => Rational::new(1, 3),
                "1" => Rational::new(2, 3),
                other => {
                    // uniform below depth 1
                    let head = &other[..1];
                    let top = if head == "0" {
                        Rational::new(1, 3)
                    } else {
                        Rational::new(2, 3)
                    };
                    top * Rational::pow2_neg(other.len() as u32 - 1)
                }
            })
        })
    }

    #[test]
    fn worked_depth_one_example() {
        let nu = rationalize(&third_measure(), 1).unwrap();
        assert_eq!(nu.value(&bs("0")).unwrap(), Rational::new(3, 8));
        assert_eq!(nu.value(&bs("1")).unwrap(), Rational::new(5, 8));
    }

    #[test]
    fn lebesgue_is_reproduced() {
        let nu = rationalize(&MeasureOracle::lebesgue(), 8).unwrap();
        for l in 0..=8usize {
            for v in nu.level_values(l) {
                assert_eq!(v, &Rational::pow2_neg(l as u32));
                assert!(v > &Rational::pow2_neg(l as u32 + 1));
            }
        }
    }

    fn assert_rationalize_contract(mu: &MeasureOracle, depth: usize) {
        let nu = rationalize(mu, depth).unwrap();
        assert!(nu.is_dyadic());
        assert!(nu.first_zero().is_none(), "values must be strictly positive");
        for l in 0..=depth {
            for sigma in BitString::all_of_length(l) {
                let m = mu.exact_value(&sigma).unwrap();
                let n = nu.value(&sigma).unwrap();
                assert!(m < &Rational::from_int(2) * &n, "mu < 2 nu fails at {sigma:?}");
            }
        }
        // additivity is validated by construction; spot-check the leaf sum
        let total: Rational = nu.level_values(depth).iter().cloned().sum();
        assert_eq!(total, Rational::one());
    }

    #[test]
    fn contract_on_bernoulli() {
        let b = MeasureOracle::bernoulli(dy("1/4")).unwrap();
        assert_rationalize_contract(&b, 10);
        // dyadic input is reproduced exactly
        let nu = rationalize(&b, 6).unwrap();
        for l in 0..=6usize {
            for sigma in BitString::all_of_length(l) {
                assert_eq!(nu.value(&sigma).unwrap(), b.exact_value(&sigma).unwrap());
            }
        }
    }

    #[test]
    fn contract_on_tree_uniform() {
        let tree = FiniteTree::from_predicate(5, |s| {
            !(0..s.len().saturating_sub(1)).any(|i| s.bit(i) && s.bit(i + 1))
        });
        let t = MeasureOracle::tree_uniform(tree).unwrap();
        assert_rationalize_contract(&t, 7);
    }

    #[test]
    fn contract_on_nondyadic_input() {
        assert_rationalize_contract(&third_measure(), 6);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        /// Random exact measure: positive integer leaf weights, normalized.
        fn leafy_measure(weights: &[u8]) -> MeasureOracle {
            let total: i64 = weights.iter().map(|&w| w as i64 + 1).sum();
            let leaves: Vec<Rational> = weights
                .iter()
                .map(|&w| Rational::new(w as i64 + 1, total))
                .collect();
            let a = CylinderAssignment::from_leaves(leaves, ExtensionPolicy::Uniform).unwrap();
            MeasureOracle::from_assignment(a)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn random_measures_rationalize_within_contract(
                weights in proptest::collection::vec(0u8..100, 8)
            ) {
                let mu = leafy_measure(&weights);
                let nu = rationalize(&mu, 5).unwrap();
                prop_assert!(nu.is_dyadic());
                prop_assert!(nu.first_zero().is_none());
                for l in 0..=5usize {
                    for sigma in BitString::all_of_length(l) {
                        let m = mu.exact_value(&sigma).unwrap();
                        let v = nu.value(&sigma).unwrap();
                        prop_assert!(m < &Rational::from_int(2) * &v);
                    }
                }
            }
        }
    }

    #[test]
    fn truncated_oracle_roundtrip() {
        // rationalizing an assignment-backed oracle exercises the stop-free path
        let b = MeasureOracle::bernoulli(dy("1/4")).unwrap();
        let a = CylinderAssignment::truncate(&b, 6, ExtensionPolicy::Uniform).unwrap();
        let nu = rationalize(&MeasureOracle::from_assignment(a), 6).unwrap();
        assert!(nu.is_dyadic());
    }
}
