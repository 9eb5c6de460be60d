//! Interval constraints on cylinder masses induced by a functional pair, and
//! a deterministic backtracking solver over dyadic grids.

use super::functional::MonotoneFunctional;
use super::TransformError;
use crate::bits::BitString;
use crate::cantor::{antichain_lebesgue_mass, prefix_free_reduce};
use crate::measures::{CylinderAssignment, ExtensionPolicy};
use crate::rational::Rational;
use std::collections::BTreeMap;

/// The constraint recorded at one string: the witness prefix `w`, the
/// preimage set `Pre`, and the admissible interval for the cylinder mass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintRecord {
    /// One-bit-per-step prefix of the inverse image; `|w|` grows by one each
    /// time it is extended, and `w` is a prefix of `psi`'s output.
    pub w: BitString,
    /// Prefix-reduced set of inputs at the use level whose `phi`-output
    /// extends the constrained string and which extend `w`.
    pub pre: std::collections::BTreeSet<BitString>,
    /// Uniform mass of the open set named by `pre`.
    pub lower: Rational,
    /// `2^-|w|`.
    pub upper: Rational,
}

/// Interval constraints per string, up to a depth. Strings where the witness
/// never advanced carry no record and no constraint.
#[derive(Clone, Debug)]
pub struct ConstraintSystem {
    depth: usize,
    records: BTreeMap<BitString, ConstraintRecord>,
}

impl ConstraintSystem {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn record(&self, sigma: &BitString) -> Option<&ConstraintRecord> {
        self.records.get(sigma)
    }

    pub fn records(&self) -> impl Iterator<Item = (&BitString, &ConstraintRecord)> {
        self.records.iter()
    }

    /// Test hook: overwrite one record's interval.
    pub fn set_interval(&mut self, sigma: &BitString, lower: Rational, upper: Rational) {
        if let Some(rec) = self.records.get_mut(sigma) {
            rec.lower = lower;
            rec.upper = upper;
        }
    }
}

/// Walk all strings to `depth`, advancing the witness `w` wherever `psi`'s
/// output properly extends the parent witness, and record the constraint
/// interval `[uniform mass of Pre, 2^-|w|]` at each such string.
///
/// The empty string always carries the trivial record `w = ε`,
/// `Pre = {ε}`, interval `[1, 1]`.
pub fn build_constraints(
    phi: &MonotoneFunctional,
    psi: &MonotoneFunctional,
    depth: usize,
) -> Result<ConstraintSystem, TransformError> {
    let mut records = BTreeMap::new();
    let mut pre_root = std::collections::BTreeSet::new();
    pre_root.insert(BitString::empty());
    records.insert(
        BitString::empty(),
        ConstraintRecord {
            w: BitString::empty(),
            pre: pre_root,
            lower: Rational::one(),
            upper: Rational::one(),
        },
    );

    // (sigma, witness last defined along the path to sigma)
    let mut stack = vec![(BitString::empty(), BitString::empty())];
    while let Some((sigma, w_last)) = stack.pop() {
        if sigma.len() == depth {
            continue;
        }
        for bit in [false, true] {
            let child = sigma.child(bit);
            let mut w_next = w_last.clone();
            if let Some(out) = psi.output(&child) {
                if w_last.len() < out.len() && w_last.is_prefix_of(out) {
                    let w = out.prefix(w_last.len() + 1);
                    let pre = preimage_set(phi, &child, &w)?;
                    let lower = antichain_lebesgue_mass(&pre);
                    let upper = Rational::pow2_neg(w.len() as u32);
                    records.insert(
                        child.clone(),
                        ConstraintRecord {
                            w: w.clone(),
                            pre,
                            lower,
                            upper,
                        },
                    );
                    w_next = w;
                }
            }
            stack.push((child, w_next));
        }
    }
    Ok(ConstraintSystem { depth, records })
}

/// All inputs at `phi`'s use level for `|sigma|` whose output extends
/// `sigma` and which extend `w`, prefix-reduced.
fn preimage_set(
    phi: &MonotoneFunctional,
    sigma: &BitString,
    w: &BitString,
) -> Result<std::collections::BTreeSet<BitString>, TransformError> {
    let use_len = phi.use_len(sigma.len())?;
    let mut set = std::collections::BTreeSet::new();
    for input in BitString::all_of_length(use_len) {
        if !w.is_prefix_of(&input) {
            continue;
        }
        if sigma.is_prefix_of(phi.output_at(sigma.len(), &input)?) {
            set.insert(input);
        }
    }
    Ok(prefix_free_reduce(&set))
}

/// Find a cylinder assignment satisfying every recorded interval, by
/// deterministic depth-first search: children are assigned level by level in
/// lexicographic order, candidate left-child masses are the dyadics of
/// exponent at most `level + grid_extra` inside the admissible range in
/// increasing order, and the first completion wins.
///
/// Fails with the first string whose recorded interval is empty, or — when
/// the grid search exhausts — the parent at the deepest, then leftmost,
/// point where no candidate split existed.
pub fn constraint_measure(
    cs: &ConstraintSystem,
    grid_extra: u32,
) -> Result<CylinderAssignment, TransformError> {
    for (sigma, rec) in cs.records() {
        if rec.lower > rec.upper {
            return Err(TransformError::Infeasible {
                sigma: sigma.clone(),
            });
        }
    }
    let mut levels: Vec<Vec<Rational>> = vec![vec![Rational::one()]];
    for l in 0..cs.depth() {
        levels.push(vec![Rational::zero(); 1 << (l + 1)]);
    }
    let mut witness: Option<BitString> = None;
    if search(cs, &mut levels, 0, 0, grid_extra, &mut witness) {
        let levels_out = levels;
        Ok(CylinderAssignment::new(levels_out, ExtensionPolicy::Uniform)?)
    } else {
        Err(TransformError::Infeasible {
            sigma: witness.unwrap_or_default(),
        })
    }
}

fn bounds_for(
    cs: &ConstraintSystem,
    sigma: &BitString,
    parent_mass: &Rational,
) -> (Rational, Rational) {
    match cs.record(sigma) {
        Some(rec) => (
            rec.lower.clone().max(Rational::zero()),
            rec.upper.clone().min(parent_mass.clone()),
        ),
        None => (Rational::zero(), parent_mass.clone()),
    }
}

fn search(
    cs: &ConstraintSystem,
    levels: &mut Vec<Vec<Rational>>,
    level: usize,
    rank: u64,
    grid_extra: u32,
    witness: &mut Option<BitString>,
) -> bool {
    if level == cs.depth() {
        return true;
    }
    if rank == 1u64 << level {
        return search(cs, levels, level + 1, 0, grid_extra, witness);
    }
    let parent_mass = levels[level][rank as usize].clone();
    let parent = BitString::from_rank(level, rank);
    let left = parent.child(false);
    let right = parent.child(true);
    let (lo_l, hi_l) = bounds_for(cs, &left, &parent_mass);
    let (lo_r, hi_r) = bounds_for(cs, &right, &parent_mass);
    // left mass a must satisfy both children: a in [lo, hi]
    let lo = lo_l.max(&parent_mass - &hi_r);
    let hi = hi_l.min(&parent_mass - &lo_r);
    let g = (level as u32 + 1) + grid_extra;
    let first = lo.grid_ceil(g);
    let last = hi.grid_floor(g);
    if first > last {
        // deepest-then-leftmost failure wins as the reported witness
        let better = match witness {
            None => true,
            Some(old) => {
                parent.len() > old.len() || (parent.len() == old.len() && parent.rank() < old.rank())
            }
        };
        if better {
            *witness = Some(parent);
        }
        return false;
    }
    let mut m = first;
    let denom = num::BigInt::from(1) << g as usize;
    while m <= last {
        let a = Rational::from_big(m.clone(), denom.clone());
        let b = &parent_mass - &a;
        levels[level + 1][(2 * rank) as usize] = a;
        levels[level + 1][(2 * rank + 1) as usize] = b;
        if search(cs, levels, level, rank + 1, grid_extra, witness) {
            return true;
        }
        m += 1;
    }
    false
}
