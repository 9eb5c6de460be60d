//! Martin-Löf tests as finite objects: budget verification, coverage,
//! pullback along a constraint system, and tree-indexed combination.

use crate::bits::BitString;
use crate::cantor::{antichain_lebesgue_mass, prefix_free_reduce};
use crate::measures::{FiniteTree, MeasureError, MeasureOracle};
use crate::rational::Rational;
use crate::textio::{expect_header, meaningful_lines, ParseError};
use crate::transforms::ConstraintSystem;
use std::collections::{BTreeMap, BTreeSet};

/// One test level: an index and a finite set of strings. The strings need
/// not be prefix-free; budgets are charged per listed string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestLevel {
    pub index: u32,
    pub strings: BTreeSet<BitString>,
}

impl TestLevel {
    pub fn new(index: u32, strings: impl IntoIterator<Item = BitString>) -> Self {
        TestLevel {
            index,
            strings: strings.into_iter().collect(),
        }
    }

    /// The level's budget, `2^-index`.
    pub fn budget(&self) -> Rational {
        Rational::pow2_neg(self.index)
    }
}

/// A finite test: levels indexed contiguously from 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MlTest {
    levels: Vec<TestLevel>,
}

/// Errors from test construction and the test operations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TestError {
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("level indices must run contiguously from 0, found {found} at position {position}")]
    NonContiguousLevels { position: usize, found: u32 },
    #[error("no constraint recorded for {sigma:?}")]
    MissingConstraint { sigma: BitString },
    #[error("tree has no node of length {level}")]
    MissingTreeLevel { level: usize },
    #[error("family has no level for index {index} at node {tau:?}")]
    MissingFamilyLevel { index: u32, tau: BitString },
}

impl MlTest {
    pub fn new(levels: Vec<TestLevel>) -> Result<Self, TestError> {
        for (i, level) in levels.iter().enumerate() {
            if level.index as usize != i {
                return Err(TestError::NonContiguousLevels {
                    position: i,
                    found: level.index,
                });
            }
        }
        Ok(MlTest { levels })
    }

    pub fn levels(&self) -> &[TestLevel] {
        &self.levels
    }

    pub fn level(&self, n: u32) -> Option<&TestLevel> {
        self.levels.get(n as usize)
    }

    /// Canonical text form (`mltest v1`).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("mltest v1\n");
        for level in &self.levels {
            let strings: Vec<String> = level.strings.iter().map(|s| s.to_token()).collect();
            out.push_str(&format!("level {}: {}\n", level.index, strings.join(", ")));
        }
        out
    }

    /// Parse the `mltest v1` format: one `level n: s1, s2, ...` line per
    /// level, contiguous from 0; an empty list after the colon is an empty
    /// level.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut lines = meaningful_lines(text);
        expect_header(&mut lines, "mltest v1")?;
        let mut levels = Vec::new();
        for (ln, line) in lines {
            let rest = line
                .strip_prefix("level")
                .ok_or_else(|| ParseError::new(ln, "expected 'level <n>: ...'"))?;
            let (idx, body) = rest
                .split_once(':')
                .ok_or_else(|| ParseError::new(ln, "expected ':' after the level index"))?;
            let index: u32 = idx
                .trim()
                .parse()
                .map_err(|_| ParseError::new(ln, "level index is not a small integer"))?;
            if index as usize != levels.len() {
                return Err(ParseError::new(
                    ln,
                    format!("expected level {}, found {}", levels.len(), index),
                ));
            }
            let mut strings = BTreeSet::new();
            for tok in body.split(',') {
                let tok = tok.trim();
                if tok.is_empty() {
                    continue;
                }
                strings.insert(BitString::parse_token(tok).map_err(|e| ParseError::new(ln, e))?);
            }
            levels.push(TestLevel { index, strings });
        }
        MlTest::new(levels).map_err(|e| ParseError::new(0, e))
    }
}

/// Verification outcome for one level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelReport {
    pub index: u32,
    /// Exact sum of masses over the listed strings.
    pub raw_sum: Rational,
    /// Mass of the open set: sum over the prefix-free reduction.
    pub open_set_mass: Rational,
    pub budget: Rational,
    /// `raw_sum <= budget`.
    pub pass: bool,
}

/// Check each level's budget `sum of mu-masses <= 2^-n` exactly, charging
/// the raw sum over the listed strings; the prefix-reduced open-set mass is
/// reported alongside.
pub fn verify_bound(test: &MlTest, mu: &MeasureOracle) -> Result<Vec<LevelReport>, TestError> {
    if !mu.is_exact() {
        return Err(MeasureError::NotExact.into());
    }
    let mut reports = Vec::with_capacity(test.levels().len());
    for level in test.levels() {
        let mut raw_sum = Rational::zero();
        for sigma in &level.strings {
            raw_sum += &mu.exact_value(sigma)?;
        }
        let mut open_set_mass = Rational::zero();
        for sigma in prefix_free_reduce(&level.strings) {
            open_set_mass += &mu.exact_value(&sigma)?;
        }
        let budget = level.budget();
        let pass = raw_sum <= budget;
        reports.push(LevelReport {
            index: level.index,
            raw_sum,
            open_set_mass,
            budget,
            pass,
        });
    }
    Ok(reports)
}

/// Whether a level covers the real named by a finite prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coverage {
    /// Some listed string is a prefix of `x`; the least such witness.
    Covered(BitString),
    /// Every listed string is incompatible with `x`.
    NotCovered,
    /// No listed string is a prefix of `x`, but some extend it, so a longer
    /// prefix could still be covered.
    Indecisive,
}

/// Decide, per level, whether the cylinder of some listed string contains
/// the real extending `x`.
pub fn covers(test: &MlTest, x: &BitString) -> Vec<Coverage> {
    test.levels()
        .iter()
        .map(|level| {
            let mut pending = false;
            for sigma in &level.strings {
                if sigma.is_prefix_of(x) {
                    return Coverage::Covered(sigma.clone());
                }
                if x.is_prefix_of(sigma) {
                    pending = true;
                }
            }
            if pending {
                Coverage::Indecisive
            } else {
                Coverage::NotCovered
            }
        })
        .collect()
}

/// Pull a test back along a constraint system: level `n` of the result is
/// the prefix-reduced union of `Pre(sigma)` over the source level's strings.
/// Every source string must carry a constraint record.
pub fn pullback(test: &MlTest, cs: &ConstraintSystem) -> Result<MlTest, TestError> {
    let mut levels = Vec::with_capacity(test.levels().len());
    for level in test.levels() {
        let mut union = BTreeSet::new();
        for sigma in &level.strings {
            let rec = cs.record(sigma).ok_or_else(|| TestError::MissingConstraint {
                sigma: sigma.clone(),
            })?;
            union.extend(rec.pre.iter().cloned());
        }
        levels.push(TestLevel {
            index: level.index,
            strings: prefix_free_reduce(&union),
        });
    }
    MlTest::new(levels)
}

/// A family of test levels indexed by `(n, tau)` for tree nodes `tau`.
#[derive(Clone, Debug, Default)]
pub struct TestFamily {
    map: BTreeMap<(u32, BitString), BTreeSet<BitString>>,
}

impl TestFamily {
    pub fn new() -> Self {
        TestFamily::default()
    }

    pub fn insert(
        &mut self,
        index: u32,
        tau: BitString,
        strings: impl IntoIterator<Item = BitString>,
    ) {
        self.map
            .insert((index, tau), strings.into_iter().collect());
    }

    pub fn get(&self, index: u32, tau: &BitString) -> Option<&BTreeSet<BitString>> {
        self.map.get(&(index, tau.clone()))
    }

    /// Canonical text form (`family v1`).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("family v1\n");
        for ((n, tau), strings) in &self.map {
            let items: Vec<String> = strings.iter().map(|s| s.to_token()).collect();
            out.push_str(&format!("level {} at {}: {}\n", n, tau.to_token(), items.join(", ")));
        }
        out
    }

    /// Parse the `family v1` format: `level <n> at <tau>: s1, s2, ...`.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut lines = meaningful_lines(text);
        expect_header(&mut lines, "family v1")?;
        let mut family = TestFamily::new();
        for (ln, line) in lines {
            let rest = line
                .strip_prefix("level")
                .ok_or_else(|| ParseError::new(ln, "expected 'level <n> at <tau>: ...'"))?;
            let (head, body) = rest
                .split_once(':')
                .ok_or_else(|| ParseError::new(ln, "expected ':' after the node"))?;
            let (idx, tau) = head
                .split_once("at")
                .ok_or_else(|| ParseError::new(ln, "expected 'at' between index and node"))?;
            let index: u32 = idx
                .trim()
                .parse()
                .map_err(|_| ParseError::new(ln, "level index is not a small integer"))?;
            let tau = BitString::parse_token(tau.trim()).map_err(|e| ParseError::new(ln, e))?;
            let mut strings = BTreeSet::new();
            for tok in body.split(',') {
                let tok = tok.trim();
                if tok.is_empty() {
                    continue;
                }
                strings.insert(BitString::parse_token(tok).map_err(|e| ParseError::new(ln, e))?);
            }
            family.map.insert((index, tau), strings);
        }
        Ok(family)
    }
}

/// Per-index outcome of [`basis_combine`]: the combined level, plus the
/// subtree of nodes that do not enumerate a prefix of the probe into their
/// own level, and its deepest member (lexicographically least among the
/// deepest) as the finite stand-in for an infinite surviving path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisLevelOutcome {
    pub index: u32,
    pub surviving: BTreeSet<BitString>,
    pub deepest_survivor: Option<BitString>,
}

/// Result of [`basis_combine`].
#[derive(Clone, Debug)]
pub struct BasisCombine {
    pub test: MlTest,
    pub outcomes: Vec<BasisLevelOutcome>,
}

/// Is the cylinder of `sigma` contained in the open set named by `strings`?
///
/// Exact finite decision: either some listed string is a prefix of `sigma`,
/// or every extension of `sigma` to the maximum listed length is covered.
pub fn cylinder_contained(sigma: &BitString, strings: &BTreeSet<BitString>) -> bool {
    if strings.iter().any(|u| u.is_prefix_of(sigma)) {
        return true;
    }
    let max_len = match strings.iter().map(|u| u.len()).max() {
        Some(l) => l,
        None => return false,
    };
    if max_len <= sigma.len() {
        return false;
    }
    let grow = max_len - sigma.len();
    (0..(1u64 << grow)).all(|r| {
        let ext = sigma.concat(&BitString::from_rank(grow, r));
        strings.iter().any(|u| u.is_prefix_of(&ext))
    })
}

/// Combine a tree-indexed family of test levels: a string enters level `n`
/// of the output when its cylinder is contained in the level of every tree
/// node of its own length. Per level, also report the subtree of nodes that
/// do not cover the corresponding prefix of `probe`, pruned to ancestors
/// with the same property.
///
/// `tree` must have nodes at every length up to `depth`, and `probe` must be
/// at least `depth` long.
pub fn basis_combine(
    tree: &FiniteTree,
    family: &TestFamily,
    n_max: u32,
    depth: usize,
    probe: &BitString,
) -> Result<BasisCombine, TestError> {
    assert!(probe.len() >= depth, "probe must reach the combination depth");
    for level in 0..=depth {
        if tree.nodes_at_level(level).next().is_none() {
            return Err(TestError::MissingTreeLevel { level });
        }
    }
    let mut levels = Vec::new();
    let mut outcomes = Vec::new();
    for n in 0..=n_max {
        let mut strings = BTreeSet::new();
        for len in 0..=depth {
            for sigma in BitString::all_of_length(len) {
                let all_contained = tree.nodes_at_level(len).try_fold(true, |acc, tau| {
                    let level = family.get(n, tau).ok_or_else(|| {
                        TestError::MissingFamilyLevel {
                            index: n,
                            tau: tau.clone(),
                        }
                    })?;
                    Ok::<bool, TestError>(acc && cylinder_contained(&sigma, level))
                })?;
                if all_contained {
                    strings.insert(sigma);
                }
            }
        }
        levels.push(TestLevel { index: n, strings });

        // survivors: tau whose own level does not cover probe's prefix of
        // tau's length, with every ancestor surviving as well
        let mut surviving: BTreeSet<BitString> = BTreeSet::new();
        for len in 0..=depth {
            let prefix = probe.prefix(len);
            for tau in tree.nodes_at_level(len) {
                let parent_ok = tau
                    .parent()
                    .is_none_or(|p| surviving.contains(&p));
                if !parent_ok {
                    continue;
                }
                let level = family.get(n, tau).ok_or_else(|| TestError::MissingFamilyLevel {
                    index: n,
                    tau: tau.clone(),
                })?;
                if !level.iter().any(|u| u.is_prefix_of(&prefix)) {
                    surviving.insert(tau.clone());
                }
            }
        }
        let deepest = surviving.iter().map(|t| t.len()).max();
        let deepest_survivor = deepest.and_then(|d| {
            surviving.iter().find(|t| t.len() == d).cloned()
        });
        outcomes.push(BasisLevelOutcome {
            index: n,
            surviving,
            deepest_survivor,
        });
    }
    Ok(BasisCombine {
        test: MlTest::new(levels)?,
        outcomes,
    })
}

/// Mass of one level under the uniform measure, charged per listed string.
pub fn raw_lebesgue_sum(level: &TestLevel) -> Rational {
    antichain_lebesgue_mass(&level.strings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;
    use crate::transforms::{build_constraints, MonotoneFunctional};

    fn level(n: u32, items: &[&str]) -> TestLevel {
        TestLevel::new(n, items.iter().map(|s| BitString::parse_token(s).unwrap()))
    }

    #[test]
    fn budget_examples() {
        let l = MeasureOracle::lebesgue();
        let t = MlTest::new(vec![level(0, &["@"])]).unwrap();
        let r = verify_bound(&t, &l).unwrap();
        assert!(r[0].pass);
        assert_eq!(r[0].raw_sum, Rational::one());

        let t = MlTest::new(vec![
            level(0, &["@"]),
            level(1, &["000"]),
            level(2, &["000", "111"]),
        ])
        .unwrap();
        let r = verify_bound(&t, &l).unwrap();
        assert!(r[2].pass);
        assert_eq!(r[2].raw_sum, Rational::new(1, 4));

        let t = MlTest::new(vec![level(0, &["@"]), level(1, &["0", "1"])]).unwrap();
        let r = verify_bound(&t, &l).unwrap();
        assert!(!r[1].pass);
        assert_eq!(r[1].raw_sum, Rational::one());
    }

    #[test]
    fn raw_sum_counts_redundant_strings() {
        // "0" and "01" overlap: raw sum charges both, the open set does not
        let l = MeasureOracle::lebesgue();
        let t = MlTest::new(vec![level(0, &["0", "01"])]).unwrap();
        let r = verify_bound(&t, &l).unwrap();
        assert_eq!(r[0].raw_sum, Rational::new(3, 4));
        assert_eq!(r[0].open_set_mass, Rational::new(1, 2));
    }

    #[test]
    fn coverage_examples() {
        let t = MlTest::new(vec![
            level(0, &["@"]),
            level(1, &["01"]),
            level(2, &["000", "111"]),
        ])
        .unwrap();
        let c = covers(&t, &bs("0000"));
        assert_eq!(c[0], Coverage::Covered(BitString::empty()));
        assert_eq!(c[1], Coverage::NotCovered);
        assert_eq!(c[2], Coverage::Covered(bs("000")));

        let t = MlTest::new(vec![level(0, &["000"])]).unwrap();
        assert_eq!(covers(&t, &bs("01"))[0], Coverage::NotCovered);
        assert_eq!(covers(&t, &bs("0"))[0], Coverage::Indecisive);
    }

    #[test]
    fn coverage_invariant_under_reduction() {
        let strings = ["0", "01", "0110", "111"];
        let t = MlTest::new(vec![level(0, &strings)]).unwrap();
        let reduced = MlTest::new(vec![TestLevel {
            index: 0,
            strings: prefix_free_reduce(&t.level(0).unwrap().strings),
        }])
        .unwrap();
        for x in BitString::all_of_length(5) {
            let a = match &covers(&t, &x)[0] {
                Coverage::Covered(_) => "c",
                Coverage::NotCovered => "n",
                Coverage::Indecisive => "i",
            };
            let b = match &covers(&reduced, &x)[0] {
                Coverage::Covered(_) => "c",
                Coverage::NotCovered => "n",
                Coverage::Indecisive => "i",
            };
            assert_eq!(a, b, "coverage changed at {x:?}");
        }
    }

    #[test]
    fn pullback_identity_is_reduction() {
        let id = MonotoneFunctional::identity(4);
        let cs = build_constraints(&id, &id, 4).unwrap();
        let t = MlTest::new(vec![level(0, &["0", "01"]), level(1, &["1101"])]).unwrap();
        let p = pullback(&t, &cs).unwrap();
        assert_eq!(p.level(0).unwrap().strings, [bs("0")].into_iter().collect());
        assert_eq!(
            p.level(1).unwrap().strings,
            [bs("1101")].into_iter().collect()
        );
    }

    #[test]
    fn pullback_projection_enumerates_the_use_level() {
        let phi = MonotoneFunctional::drop_odd_bits(3);
        let psi = MonotoneFunctional::double_each_bit(6);
        let cs = build_constraints(&phi, &psi, 3).unwrap();
        let t = MlTest::new(vec![level(0, &["01"])]).unwrap();
        let p = pullback(&t, &cs).unwrap();
        let expect: BTreeSet<BitString> = [bs("0010"), bs("0011")].into_iter().collect();
        assert_eq!(p.level(0).unwrap().strings, expect);
    }

    #[test]
    fn pullback_missing_record_is_an_error() {
        let phi = MonotoneFunctional::identity(3);
        let psi = MonotoneFunctional::drop_odd_bits(3);
        let cs = build_constraints(&phi, &psi, 3).unwrap();
        let t = MlTest::new(vec![level(0, &["0"])]).unwrap();
        assert_eq!(
            pullback(&t, &cs),
            Err(TestError::MissingConstraint { sigma: bs("0") })
        );
    }

    #[test]
    fn empty_level_pulls_back_empty() {
        let id = MonotoneFunctional::identity(2);
        let cs = build_constraints(&id, &id, 2).unwrap();
        let t = MlTest::new(vec![level(0, &[])]).unwrap();
        let p = pullback(&t, &cs).unwrap();
        assert!(p.level(0).unwrap().strings.is_empty());
    }

    #[test]
    fn containment_decision() {
        let u: BTreeSet<BitString> = [bs("00"), bs("01")].into_iter().collect();
        assert!(cylinder_contained(&bs("0"), &u));
        assert!(cylinder_contained(&bs("001"), &u));
        assert!(!cylinder_contained(&bs("1"), &u));
        assert!(!cylinder_contained(&BitString::empty(), &u));
        assert!(!cylinder_contained(&bs("0"), &BTreeSet::new()));
    }

    fn family_constant(tree: &FiniteTree, n_max: u32, items: &[&str]) -> TestFamily {
        let mut family = TestFamily::new();
        for n in 0..=n_max {
            for tau in tree.nodes() {
                family.insert(
                    n,
                    tau.clone(),
                    items.iter().map(|s| BitString::parse_token(s).unwrap()),
                );
            }
        }
        family
    }

    #[test]
    fn basis_with_full_levels_takes_everything() {
        let tree = FiniteTree::full(3);
        let family = family_constant(&tree, 1, &["@"]);
        let out = basis_combine(&tree, &family, 1, 3, &bs("0000")).unwrap();
        for n in 0..=1u32 {
            let total: usize = (0..=3usize).map(|l| 1 << l).sum();
            assert_eq!(out.test.level(n).unwrap().strings.len(), total);
            // every node covers the probe, so nothing survives
            assert!(out.outcomes[n as usize].surviving.is_empty());
            assert_eq!(out.outcomes[n as usize].deepest_survivor, None);
        }
    }

    #[test]
    fn basis_with_empty_levels_takes_nothing() {
        let tree = FiniteTree::full(3);
        let family = family_constant(&tree, 1, &[]);
        let out = basis_combine(&tree, &family, 1, 3, &bs("000")).unwrap();
        for n in 0..=1u32 {
            assert!(out.test.level(n).unwrap().strings.is_empty());
            // no node covers anything: the whole tree survives
            assert_eq!(
                out.outcomes[n as usize].surviving.len(),
                tree.nodes().len()
            );
            assert_eq!(
                out.outcomes[n as usize].deepest_survivor,
                Some(bs("000"))
            );
        }
    }

    #[test]
    fn basis_single_path_tree() {
        // tree = prefixes of 0000; node 0^m carries level {0^m}
        let depth = 4usize;
        let tree = FiniteTree::from_predicate(depth, |s| s.bits().all(|b| !b));
        let mut family = TestFamily::new();
        for tau in tree.nodes() {
            family.insert(0, tau.clone(), [tau.clone()]);
        }
        let out = basis_combine(&tree, &family, 0, depth, &bs("11111")).unwrap();
        let expect: BTreeSet<BitString> =
            (0..=depth).map(BitString::zeros).collect();
        assert_eq!(out.test.level(0).unwrap().strings, expect);
    }

    /// Brute-force containment: enumerate every string of the maximum listed
    /// length below sigma.
    fn brute_contained(sigma: &BitString, strings: &BTreeSet<BitString>) -> bool {
        let max_len = strings.iter().map(|u| u.len()).max().unwrap_or(0);
        let len = max_len.max(sigma.len());
        let grow = len - sigma.len();
        if strings.is_empty() {
            return false;
        }
        (0..(1u64 << grow)).all(|r| {
            let ext = sigma.concat(&BitString::from_rank(grow, r));
            strings.iter().any(|u| u.is_prefix_of(&ext))
        })
    }

    #[test]
    fn basis_matches_brute_force_on_mixed_fixture() {
        let tree = FiniteTree::from_predicate(3, |s| {
            // drop the subtree below "11"
            !(s.len() >= 2 && s.bit(0) && s.bit(1))
        });
        let mut family = TestFamily::new();
        for tau in tree.nodes() {
            // nodes starting with 0 cover the left half, others cover "10"
            let items: Vec<BitString> = if tau.is_empty() || !tau.bit(0) {
                vec![bs("0")]
            } else {
                vec![bs("10"), bs("0")]
            };
            family.insert(0, tau.clone(), items);
        }
        let out = basis_combine(&tree, &family, 0, 3, &bs("100")).unwrap();
        for len in 0..=3usize {
            for sigma in BitString::all_of_length(len) {
                let expect = tree.nodes_at_level(len).all(|tau| {
                    brute_contained(&sigma, family.get(0, tau).unwrap())
                });
                assert_eq!(
                    out.test.level(0).unwrap().strings.contains(&sigma),
                    expect,
                    "disagreement at {sigma:?}"
                );
            }
        }
    }

    #[test]
    fn family_text_roundtrip() {
        let tree = FiniteTree::full(2);
        let family = family_constant(&tree, 1, &["0", "11"]);
        let text = family.to_text();
        let parsed = TestFamily::parse(&text).unwrap();
        assert_eq!(text, parsed.to_text());
    }

    #[test]
    fn text_roundtrip() {
        let t = MlTest::new(vec![
            level(0, &["@"]),
            level(1, &[]),
            level(2, &["00", "111"]),
        ])
        .unwrap();
        let text = t.to_text();
        let parsed = MlTest::parse(&text).unwrap();
        assert_eq!(t, parsed);
        assert_eq!(text, parsed.to_text());

        let err = MlTest::parse("mltest v1\nlevel 1: 0\n").unwrap_err();
        assert_eq!(err.line, 2);
    }
}
