//! Pushforward of a measure along a monotone functional, and the repaired
//! variant that spreads out mass whose preimages clash with an inverse
//! candidate.

use super::functional::MonotoneFunctional;
use super::TransformError;
use crate::bits::BitString;
use crate::exec;
use crate::measures::{CylinderAssignment, ExtensionPolicy, MeasureError, MeasureOracle};
use crate::rational::Rational;

/// The image measure of `mu` under `phi`, to `depth`: the mass of an output
/// cylinder is the `mu`-mass of its preimage,
/// `value(tau) = sum { mu(sigma) : |sigma| = use(|tau|), phi(sigma) ⊒ tau }`.
///
/// Monotonicity makes the per-level sums additive, so the assignment is
/// computed once at the leaf level and summed upward; the result carries the
/// uniform extension policy.
pub fn image_measure(
    mu: &MeasureOracle,
    phi: &MonotoneFunctional,
    depth: usize,
) -> Result<CylinderAssignment, TransformError> {
    if !mu.is_exact() {
        return Err(TransformError::Measure(MeasureError::NotExact));
    }
    if depth == 0 {
        return Ok(CylinderAssignment::new(
            vec![vec![mu.exact_value(&BitString::empty())?]],
            ExtensionPolicy::Uniform,
        )?);
    }
    let use_len = phi.use_len(depth)?;
    let masses = exec::try_map_level(use_len, |sigma| mu.exact_value(sigma))?;
    let mut leaves = vec![Rational::zero(); 1 << depth];
    for (rank, mass) in masses.into_iter().enumerate() {
        let input = BitString::from_rank(use_len, rank as u64);
        let out = phi.output_at(depth, &input)?;
        leaves[out.prefix(depth).rank() as usize] += &mass;
    }
    Ok(CylinderAssignment::from_leaves(leaves, ExtensionPolicy::Uniform)?)
}

/// The image of `mu` under `phi`, repaired for continuity against `psi`: when
/// a preimage string of an output `tau` is discovered incompatible with
/// `psi(tau)`, its mass stops following the preimage and is instead split
/// evenly among both children at each subsequent level.
///
/// With compatible functionals (for instance an identity pair) nothing is
/// discovered and the result is the plain image measure. Total mass is
/// conserved at every depth.
pub fn continuity_repair(
    mu: &MeasureOracle,
    phi: &MonotoneFunctional,
    psi: &MonotoneFunctional,
    depth: usize,
) -> Result<CylinderAssignment, TransformError> {
    if !mu.is_exact() {
        return Err(TransformError::Measure(MeasureError::NotExact));
    }

    // Per output tau, the preimage strings still following phi, plus the
    // mass already diverted: `pools[t]` spreads uniformly, `removed[t]`
    // joins the spread one level later.
    struct Class {
        survivors: Vec<BitString>,
        removed: Rational,
        pool: Rational,
    }

    let mut classes = vec![Class {
        survivors: vec![BitString::empty()],
        removed: Rational::zero(),
        pool: Rational::zero(),
    }];
    let mut levels: Vec<Vec<Rational>> = vec![vec![mu.exact_value(&BitString::empty())?]];
    let mut prev_use = 0usize;

    for n in 1..=depth {
        let use_len = phi.use_len(n)?;
        let grow = use_len - prev_use;
        let mut next_classes = Vec::with_capacity(2 * classes.len());
        let mut row = Vec::with_capacity(2 * classes.len());
        for (t, class) in classes.iter().enumerate() {
            let tau = BitString::from_rank(n - 1, t as u64);
            let mut children = [
                Class {
                    survivors: Vec::new(),
                    removed: Rational::zero(),
                    pool: Rational::zero(),
                },
                Class {
                    survivors: Vec::new(),
                    removed: Rational::zero(),
                    pool: Rational::zero(),
                },
            ];
            let mut inherited = &class.pool + &class.removed;
            inherited.halve();
            children[0].pool = inherited.clone();
            children[1].pool = inherited;
            let psi_out: [Option<BitString>; 2] = [
                psi.output(&tau.child(false)).cloned(),
                psi.output(&tau.child(true)).cloned(),
            ];
            for parent_input in &class.survivors {
                for ext_rank in 0..(1u64 << grow) {
                    let input = parent_input.concat(&BitString::from_rank(grow, ext_rank));
                    let out = phi.output_at(n, &input)?;
                    let side = usize::from(out.bit(n - 1));
                    match &psi_out[side] {
                        Some(r) if !input.comparable(r) => {
                            children[side].removed += &mu.exact_value(&input)?;
                        }
                        _ => children[side].survivors.push(input),
                    }
                }
            }
            for child in children {
                let mut mass = &child.removed + &child.pool;
                for s in &child.survivors {
                    mass += &mu.exact_value(s)?;
                }
                row.push(mass);
                next_classes.push(child);
            }
        }
        levels.push(row);
        classes = next_classes;
        prev_use = use_len;
    }
    Ok(CylinderAssignment::new(levels, ExtensionPolicy::Uniform)?)
}
