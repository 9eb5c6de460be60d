//! Locating atoms of a measure with a threshold tree.
//!
//! For a threshold `c`, the tree keeps the strings whose mass, evaluated at
//! precision equal to their own length, is at least `c - 2^-|sigma|`. Any
//! atom of mass above `c` survives at every level, while for exact oracles
//! the number of survivors at level `m` is at most `1/(c - 2^-m)` once that
//! bound applies. A path that is forced unique from some such level down to
//! the bottom is reported as an isolated-path certificate.

use crate::bits::BitString;
use crate::measures::{MeasureError, MeasureOracle};
use crate::rational::Rational;
use std::collections::BTreeSet;

/// The threshold tree of a measure: prefix-closed, one node set per level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomTree {
    threshold: Rational,
    depth: u32,
    nodes: BTreeSet<BitString>,
}

impl AtomTree {
    pub fn threshold(&self) -> &Rational {
        &self.threshold
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn nodes(&self) -> &BTreeSet<BitString> {
        &self.nodes
    }

    pub fn contains(&self, sigma: &BitString) -> bool {
        self.nodes.contains(sigma)
    }

    /// Number of nodes at one level.
    pub fn width(&self, level: u32) -> usize {
        self.nodes.iter().filter(|n| n.len() == level as usize).count()
    }

    pub fn nodes_at_level(&self, level: u32) -> impl Iterator<Item = &BitString> {
        self.nodes
            .iter()
            .filter(move |n| n.len() == level as usize)
    }

    /// `c - 2^-m`, positive exactly when the width bound applies at level `m`.
    pub fn bound_margin(&self, level: u32) -> Rational {
        &self.threshold - &Rational::pow2_neg(level)
    }

    /// Indented rendering of the tree, depth-first in lexicographic order.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for node in &self.nodes {
            for _ in 0..node.len() {
                out.push_str("  ");
            }
            out.push_str(&node.to_token());
            out.push('\n');
        }
        out
    }
}

/// Build the threshold tree of `mu` for threshold `0 < c < 1`, to `depth`.
///
/// A string enters when its own value test passes and its parent entered;
/// for exact oracles the parent test is implied, so the node set is exactly
/// `{sigma : value(sigma, |sigma|) >= c - 2^-|sigma|}`.
pub fn atom_tree(
    mu: &MeasureOracle,
    c: &Rational,
    depth: u32,
) -> Result<AtomTree, MeasureError> {
    if c.is_zero() || c.is_negative() || c >= &Rational::one() {
        return Err(MeasureError::NonpositiveEpsilon);
    }
    let mut nodes = BTreeSet::new();
    let mut frontier: Vec<BitString> = Vec::new();
    let empty = BitString::empty();
    if mu.value(&empty, 0)? >= (c - &Rational::one()) {
        nodes.insert(empty.clone());
        frontier.push(empty);
    }
    for level in 1..=depth {
        let margin = c - &Rational::pow2_neg(level);
        let mut next = Vec::new();
        for parent in frontier {
            for bit in [false, true] {
                let child = parent.child(bit);
                if mu.value(&child, level)? >= margin {
                    nodes.insert(child.clone());
                    next.push(child);
                }
            }
        }
        frontier = next;
    }
    Ok(AtomTree {
        threshold: c.clone(),
        depth,
        nodes,
    })
}

/// Result of the isolated-path search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsolationReport {
    /// Bottom-level nodes certified to lie on an isolated path.
    pub certified: Vec<BitString>,
    /// Level from which the tree is a single path, when certification
    /// succeeded.
    pub certification_level: Option<u32>,
    /// Set when the tree has surviving paths but no certificate: the width
    /// bound never pinned the tree to a single path within its depth.
    pub inconclusive: bool,
}

/// Certify isolated paths at the bottom level of a threshold tree.
///
/// Certification requires a level `m` with `c > 2^-m` (so level widths are
/// bounded at all) from which the tree is a single path down to its depth;
/// the unique bottom node is then reported, and every sibling subtree is
/// empty below `m`. When survivors exist but no such level does, the search
/// is inconclusive rather than wrong: finite depth cannot rule out later
/// branching.
pub fn isolated_paths(tree: &AtomTree) -> IsolationReport {
    let depth = tree.depth();
    let bottom: Vec<&BitString> = tree.nodes_at_level(depth).collect();
    if bottom.is_empty() {
        return IsolationReport {
            certified: Vec::new(),
            certification_level: None,
            inconclusive: false,
        };
    }
    let widths: Vec<usize> = (0..=depth).map(|l| tree.width(l)).collect();
    for m in 0..=depth {
        let margin = tree.bound_margin(m);
        if margin.is_zero() || margin.is_negative() {
            continue;
        }
        if (m..=depth).all(|l| widths[l as usize] == 1) {
            return IsolationReport {
                certified: vec![bottom[0].clone()],
                certification_level: Some(m),
                inconclusive: false,
            };
        }
    }
    IsolationReport {
        certified: Vec::new(),
        certification_level: None,
        inconclusive: true,
    }
}
