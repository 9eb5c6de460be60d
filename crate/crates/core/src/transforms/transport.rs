//! Transport of a positive dyadic assignment onto the uniform measure.

use super::functional::MonotoneFunctional;
use super::TransformError;
use crate::bits::BitString;
use crate::measures::CylinderAssignment;
use crate::rational::Rational;

/// Build the monotone level map that carries `nu` onto the uniform measure
/// up to one cylinder width: the induced image satisfies
/// `|nu_phi(tau) - 2^-|tau|| <= 2^-|tau|` for every output `tau` up to
/// length `m`.
///
/// `nu` must be dyadic with strictly positive values, and must admit levels
/// `l_1 < l_2 < ... < l_m` within its depth where all values drop below
/// `2^-k`; the result uses `use(k) = l_k`. Each output's preimage is a
/// lexicographic interval of level-`l_k` strings. An interval splits at the
/// least index whose cumulative mass reaches the output boundary's ideal
/// position `j · 2^-k` in the full distribution, clamped so both halves stay
/// nonempty; every boundary therefore sits within one level-`l_k` cylinder
/// mass of its ideal, which keeps each output within `2^-|tau|` of uniform
/// and makes the map level-wise surjective and order-preserving.
pub fn transport_map(
    nu: &CylinderAssignment,
    m: u32,
) -> Result<MonotoneFunctional, TransformError> {
    assert!(m >= 1, "need at least one output level");
    if let Some(sigma) = nu.first_zero() {
        return Err(TransformError::NotPositive { sigma });
    }
    if let Some(sigma) = first_non_dyadic(nu) {
        return Err(TransformError::NotDyadic { sigma });
    }
    let moduli = strict_moduli(nu, m)?;

    // Preimage intervals of the current outputs, as rank bounds at the
    // current level. Invariant: bounds has one entry per output in output
    // rank order, plus a final sentinel.
    let mut bounds: Vec<u64> = vec![0, 1]; // level 0: the empty string
    let mut prev_level = 0usize;
    let mut outputs_prev: Vec<BitString> = vec![BitString::empty()];
    let mut levels: Vec<(usize, Vec<BitString>)> = Vec::new();

    for &level in moduli.iter() {
        let shift = (level - prev_level) as u32;
        let values = nu.level_values(level);
        // prefix sums over the whole level: prefix[i] = mass of ranks < i
        let mut prefix = Vec::with_capacity(values.len() + 1);
        let mut acc = Rational::zero();
        prefix.push(acc.clone());
        for v in values {
            acc += v;
            prefix.push(acc.clone());
        }

        let mut new_bounds = Vec::with_capacity(2 * outputs_prev.len() + 1);
        let mut new_outputs = Vec::with_capacity(2 * outputs_prev.len());
        let mut table = vec![BitString::empty(); values.len()];
        new_bounds.push(0);
        for (t, tau) in outputs_prev.iter().enumerate() {
            let start = bounds[t] << shift;
            let end = bounds[t + 1] << shift;
            let pivot = split_point(&prefix, start, end);
            for (child_bit, (a, b)) in [(false, (start, pivot)), (true, (pivot, end))] {
                let child = tau.child(child_bit);
                for slot in table.iter_mut().take(b as usize).skip(a as usize) {
                    *slot = child.clone();
                }
                new_bounds.push(b);
                new_outputs.push(child);
            }
        }
        levels.push((level, table));
        bounds = new_bounds;
        outputs_prev = new_outputs;
        prev_level = level;
    }
    MonotoneFunctional::new(levels)
}

fn first_non_dyadic(nu: &CylinderAssignment) -> Option<BitString> {
    for l in 0..=nu.depth() {
        if let Some(r) = nu.level_values(l).iter().position(|v| !v.is_dyadic()) {
            return Some(BitString::from_rank(l, r as u64));
        }
    }
    None
}

/// Strictly increasing levels `l_k` with all values at level `l_k` at most
/// `2^-k`, for `k = 1..=m`.
fn strict_moduli(nu: &CylinderAssignment, m: u32) -> Result<Vec<usize>, TransformError> {
    let mut moduli = Vec::with_capacity(m as usize);
    let mut prev: usize = 0;
    for k in 1..=m {
        let bound = Rational::pow2_neg(k);
        // level maxima are nonincreasing, so scan upward from the last level
        let mut found = None;
        for l in prev + 1..=nu.depth() {
            if nu.max_at_level(l) <= &bound {
                found = Some(l);
                break;
            }
        }
        let l = found.ok_or(TransformError::ModulusUnavailable { index: k })?;
        moduli.push(l);
        prev = l;
    }
    Ok(moduli)
}

/// The index `s` in `[start+1, end-1]` whose cumulative mass `prefix[s]`
/// lies closest to half of the interval's mass, preferring the smaller index
/// on ties. Both halves of the interval stay nonempty.
fn split_point(prefix: &[Rational], start: u64, end: u64) -> u64 {
    if end <= start + 1 {
        return end;
    }
    let target = {
        let mut t = &prefix[end as usize] - &prefix[start as usize];
        t.halve();
        t + &prefix[start as usize]
    };
    // least s with prefix[s] >= target, then compare against its neighbor
    let (mut lo, mut hi) = (start + 1, end - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if prefix[mid as usize] >= target {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    if lo > start + 1 && prefix[lo as usize] >= target {
        let over = &prefix[lo as usize] - &target;
        let under = &target - &prefix[(lo - 1) as usize];
        if under <= over {
            return lo - 1;
        }
    }
    lo
}
