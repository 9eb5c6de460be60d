//! Data-parallel level sweeps with a sequential fallback.
//!
//! Everything funneled through here is a pure map or an exact rational
//! reduction over the strings of one length, so the parallel and sequential
//! paths produce identical values. The `parallel` feature (on by default)
//! routes the work through rayon; without it the same closures run in a
//! plain loop.

use crate::bits::BitString;
use crate::rational::Rational;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Minimum number of items before a sweep is worth splitting.
#[cfg(feature = "parallel")]
const PAR_THRESHOLD: u64 = 1 << 10;

/// Apply `f` to the ranks `0..count`, collecting results in order.
pub fn map_ranks<T, F>(count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if count >= PAR_THRESHOLD {
            return (0..count).into_par_iter().map(f).collect();
        }
    }
    (0..count).map(f).collect()
}

/// Apply `f` to every string of length `len`, collecting results in
/// lexicographic order.
pub fn map_level<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&BitString) -> T + Sync,
{
    map_ranks(1u64 << len, |r| f(&BitString::from_rank(len, r)))
}

/// Fallible [`map_level`]: the first error (in lexicographic order) wins.
pub fn try_map_level<T, E, F>(len: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(&BitString) -> Result<T, E> + Sync,
{
    let results = map_ranks(1u64 << len, |r| f(&BitString::from_rank(len, r)));
    let mut out = Vec::with_capacity(results.len());
    for r in results {
        out.push(r?);
    }
    Ok(out)
}

/// Exact sum of `f` over every string of length `len`.
pub fn sum_level<F>(len: usize, f: F) -> Rational
where
    F: Fn(&BitString) -> Rational + Sync,
{
    let count = 1u64 << len;
    #[cfg(feature = "parallel")]
    {
        if count >= PAR_THRESHOLD {
            return (0..count)
                .into_par_iter()
                .fold(Rational::zero, |mut acc, r| {
                    acc += &f(&BitString::from_rank(len, r));
                    acc
                })
                .reduce(Rational::zero, |a, b| a + b);
        }
    }
    let mut acc = Rational::zero();
    for r in 0..count {
        acc += &f(&BitString::from_rank(len, r));
    }
    acc
}

/// Run two closures, in parallel when the feature is enabled and `split` is
/// true. Tree recursions pass `split = depth remaining is large`.
pub fn join<A, B, FA, FB>(split: bool, fa: FA, fb: FB) -> (A, B)
where
    A: Send,
    B: Send,
    FA: FnOnce() -> A + Send,
    FB: FnOnce() -> B + Send,
{
    #[cfg(feature = "parallel")]
    {
        if split {
            return rayon::join(fa, fb);
        }
    }
    let _ = split;
    (fa(), fb())
}

/// Levels at or above this remaining depth are split in tree recursions.
pub const JOIN_DEPTH: usize = 10;
