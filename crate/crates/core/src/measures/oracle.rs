//! Measure oracles: the evaluation contract and the built-in constructors.

use super::assignment::CylinderAssignment;
use super::MeasureError;
use crate::bits::BitString;
use crate::rational::{DyadicRational, Rational};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

/// An eventually periodic point of Cantor space: `head ⌢ period^∞`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PeriodicPoint {
    head: BitString,
    period: BitString,
}

impl PeriodicPoint {
    pub fn new(head: BitString, period: BitString) -> Result<Self, MeasureError> {
        if period.is_empty() {
            return Err(MeasureError::EmptyPeriod);
        }
        Ok(PeriodicPoint { head, period })
    }

    /// The point `sigma ⌢ 000...`.
    pub fn zero_extension(head: BitString) -> Self {
        PeriodicPoint {
            head,
            period: BitString::zeros(1),
        }
    }

    pub fn all_zeros() -> Self {
        PeriodicPoint::zero_extension(BitString::empty())
    }

    pub fn all_ones() -> Self {
        PeriodicPoint {
            head: BitString::empty(),
            period: BitString::ones(1),
        }
    }

    pub fn bit(&self, i: usize) -> bool {
        if i < self.head.len() {
            self.head.bit(i)
        } else {
            self.period.bit((i - self.head.len()) % self.period.len())
        }
    }

    /// The first `n` bits of the point.
    pub fn prefix(&self, n: usize) -> BitString {
        BitString::from_bits((0..n).map(|i| self.bit(i)))
    }

    /// True when `sigma` is an initial segment of the point.
    pub fn starts_with(&self, sigma: &BitString) -> bool {
        (0..sigma.len()).all(|i| sigma.bit(i) == self.bit(i))
    }
}

impl fmt::Display for PeriodicPoint {
    /// Canonical form `head(period)*`, e.g. `01(10)*`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})*", self.head, self.period)
    }
}

impl FromStr for PeriodicPoint {
    type Err = String;

    /// Accepts `head(period)*`, `headB*` for a single repeated bit `B`, and
    /// plain `bits` as shorthand for `bits(0)*`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse_bits = |t: &str| -> Result<BitString, String> {
            t.parse::<BitString>().map_err(|e| e.to_string())
        };
        if let Some(body) = s.strip_suffix('*') {
            if let Some(open) = body.find('(') {
                let close = body
                    .strip_suffix(')')
                    .ok_or_else(|| format!("unbalanced parentheses in {s:?}"))?;
                let head = parse_bits(&close[..open])?;
                let period = parse_bits(&body[open + 1..body.len() - 1])?;
                if period.is_empty() {
                    return Err("empty period".to_string());
                }
                return PeriodicPoint::new(head, period).map_err(|e| e.to_string());
            }
            if body.is_empty() {
                return Err("missing bit before '*'".to_string());
            }
            let bits = parse_bits(body)?;
            let head = bits.prefix(bits.len() - 1);
            let period = BitString::from_bits([bits.bit(bits.len() - 1)]);
            return PeriodicPoint::new(head, period).map_err(|e| e.to_string());
        }
        Ok(PeriodicPoint::zero_extension(parse_bits(s)?))
    }
}

/// A finitely supported measure with rational weights: mass `Q(sigma)` on the
/// point `sigma ⌢ 000...` for each `sigma` in the support.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FiniteRationalMeasure {
    weights: Vec<(BitString, Rational)>,
}

impl FiniteRationalMeasure {
    /// The support strings must be distinct, the weights positive and
    /// summing to exactly 1.
    pub fn new(weights: Vec<(BitString, Rational)>) -> Result<Self, MeasureError> {
        let mut seen = BTreeSet::new();
        for (sigma, w) in &weights {
            if !seen.insert(sigma.clone()) {
                return Err(MeasureError::DuplicateValue {
                    sigma: sigma.clone(),
                });
            }
            if w.is_zero() || w.is_negative() {
                return Err(MeasureError::NonpositiveWeight {
                    sigma: sigma.clone(),
                });
            }
        }
        let total: Rational = weights.iter().map(|(_, w)| w.clone()).sum();
        if total != Rational::one() {
            return Err(MeasureError::WeightSum);
        }
        Ok(FiniteRationalMeasure { weights })
    }

    pub fn atoms(&self) -> impl Iterator<Item = (PeriodicPoint, &Rational)> {
        self.weights
            .iter()
            .map(|(s, w)| (PeriodicPoint::zero_extension(s.clone()), w))
    }

    fn value(&self, sigma: &BitString) -> Rational {
        let mut total = Rational::zero();
        for (support, w) in &self.weights {
            if PeriodicPoint::zero_extension(support.clone()).starts_with(sigma) {
                total += w;
            }
        }
        total
    }
}

/// A finite-depth binary tree: a prefix-closed set of strings of length at
/// most `depth`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FiniteTree {
    depth: usize,
    nodes: BTreeSet<BitString>,
}

impl FiniteTree {
    pub fn new(depth: usize, nodes: BTreeSet<BitString>) -> Result<Self, MeasureError> {
        if !nodes.contains(&BitString::empty()) {
            return Err(MeasureError::NotPrefixClosed {
                sigma: BitString::empty(),
            });
        }
        for node in &nodes {
            if node.len() > depth {
                return Err(MeasureError::NodeBeyondDepth {
                    sigma: node.clone(),
                });
            }
            if let Some(parent) = node.parent() {
                if !nodes.contains(&parent) {
                    return Err(MeasureError::NotPrefixClosed {
                        sigma: node.clone(),
                    });
                }
            }
        }
        Ok(FiniteTree { depth, nodes })
    }

    /// Keep the nodes up to `depth` where `keep` holds along the whole path.
    pub fn from_predicate(depth: usize, keep: impl Fn(&BitString) -> bool) -> Self {
        let mut nodes = BTreeSet::new();
        let mut frontier = vec![BitString::empty()];
        if !keep(&BitString::empty()) {
            // an empty predicate still needs a root to be a tree
            nodes.insert(BitString::empty());
            return FiniteTree { depth, nodes };
        }
        while let Some(node) = frontier.pop() {
            nodes.insert(node.clone());
            if node.len() < depth {
                for bit in [false, true] {
                    let child = node.child(bit);
                    if keep(&child) {
                        frontier.push(child);
                    }
                }
            }
        }
        FiniteTree { depth, nodes }
    }

    pub fn full(depth: usize) -> Self {
        FiniteTree::from_predicate(depth, |_| true)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn contains(&self, sigma: &BitString) -> bool {
        self.nodes.contains(sigma)
    }

    pub fn nodes(&self) -> &BTreeSet<BitString> {
        &self.nodes
    }

    pub fn nodes_at_level(&self, level: usize) -> impl Iterator<Item = &BitString> {
        self.nodes.iter().filter(move |n| n.len() == level)
    }

    /// Every node shorter than the depth must have a child in the tree.
    pub fn require_no_dead_ends(&self) -> Result<(), MeasureError> {
        for node in &self.nodes {
            if node.len() < self.depth
                && !self.nodes.contains(&node.child(false))
                && !self.nodes.contains(&node.child(true))
            {
                return Err(MeasureError::DeadNode {
                    sigma: node.clone(),
                });
            }
        }
        Ok(())
    }

    /// Canonical text form (`tree v1`).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("tree v1\n");
        out.push_str(&format!("depth: {}\n", self.depth));
        for node in &self.nodes {
            out.push_str(&node.to_token());
            out.push('\n');
        }
        out
    }

    /// Parse the `tree v1` format: a depth line, then one node per line.
    pub fn parse(text: &str) -> Result<Self, crate::textio::ParseError> {
        use crate::textio::{expect_header, meaningful_lines, ParseError};
        let mut lines = meaningful_lines(text);
        expect_header(&mut lines, "tree v1")?;
        let (dline, dtext) = lines
            .next()
            .ok_or_else(|| ParseError::new(2, "missing 'depth:' line"))?;
        let depth: usize = dtext
            .strip_prefix("depth:")
            .ok_or_else(|| ParseError::new(dline, "expected 'depth: <n>'"))?
            .trim()
            .parse()
            .map_err(|_| ParseError::new(dline, "depth is not a small integer"))?;
        let mut nodes = BTreeSet::new();
        for (ln, line) in lines {
            let node = BitString::parse_token(line).map_err(|e| ParseError::new(ln, e))?;
            nodes.insert(node);
        }
        FiniteTree::new(depth, nodes).map_err(|e| crate::textio::ParseError::new(0, e))
    }
}

type CustomFn = dyn Fn(&BitString, u32) -> Result<Rational, MeasureError> + Send + Sync;

enum Kind {
    Lebesgue,
    Dirac(PeriodicPoint),
    Bernoulli { p: Rational, q: Rational },
    FiniteRational(FiniteRationalMeasure),
    TreeUniform(FiniteTree),
    Assignment(CylinderAssignment),
    Mixture(Vec<(Rational, MeasureOracle)>),
    Custom { exact: bool, eval: Box<CustomFn> },
}

/// An approximation oracle for a Borel probability measure: `value(sigma, n)`
/// is within `2^-n` of the cylinder mass at `sigma`. Exact oracles ignore the
/// precision argument, return the mass itself, and satisfy additivity
/// exactly.
///
/// Oracles are immutable and cheap to clone; concurrent evaluation is safe
/// and deterministic.
#[derive(Clone)]
pub struct MeasureOracle {
    kind: Arc<Kind>,
}

impl MeasureOracle {
    fn wrap(kind: Kind) -> Self {
        MeasureOracle {
            kind: Arc::new(kind),
        }
    }

    /// The uniform measure: mass `2^-|sigma|` on every cylinder.
    pub fn lebesgue() -> Self {
        MeasureOracle::wrap(Kind::Lebesgue)
    }

    /// Unit mass on a single eventually periodic point.
    pub fn dirac(point: PeriodicPoint) -> Self {
        MeasureOracle::wrap(Kind::Dirac(point))
    }

    /// Independent coin with dyadic success probability `p`, `0 < p < 1`.
    pub fn bernoulli(p: DyadicRational) -> Result<Self, MeasureError> {
        let p = p.to_rational();
        if p <= Rational::zero() || p >= Rational::one() {
            return Err(MeasureError::BernoulliParameter);
        }
        let q = Rational::one() - &p;
        Ok(MeasureOracle::wrap(Kind::Bernoulli { p, q }))
    }

    /// The finitely supported measure `sum Q(sigma) · point-mass(sigma ⌢ 000...)`.
    pub fn finite_rational(m: FiniteRationalMeasure) -> Self {
        MeasureOracle::wrap(Kind::FiniteRational(m))
    }

    /// Distribute unit mass uniformly over the paths of a finite tree: a
    /// child inherits its parent's full mass when its sibling is off the
    /// tree, half of it otherwise, and off-tree cylinders get zero. Below
    /// the tree depth the extension is uniform.
    pub fn tree_uniform(tree: FiniteTree) -> Result<Self, MeasureError> {
        tree.require_no_dead_ends()?;
        Ok(MeasureOracle::wrap(Kind::TreeUniform(tree)))
    }

    /// Exact convex combination of exact oracles.
    pub fn mixture(parts: Vec<(Rational, MeasureOracle)>) -> Result<Self, MeasureError> {
        if parts.is_empty() {
            return Err(MeasureError::EmptyMixture);
        }
        for (w, part) in &parts {
            if w.is_zero() || w.is_negative() {
                return Err(MeasureError::WeightSum);
            }
            if !part.is_exact() {
                return Err(MeasureError::NotExact);
            }
        }
        let total: Rational = parts.iter().map(|(w, _)| w.clone()).sum();
        if total != Rational::one() {
            return Err(MeasureError::WeightSum);
        }
        Ok(MeasureOracle::wrap(Kind::Mixture(parts)))
    }

    /// Exact oracle backed by a finite-depth assignment and its extension
    /// policy.
    pub fn from_assignment(assignment: CylinderAssignment) -> Self {
        MeasureOracle::wrap(Kind::Assignment(assignment))
    }

    /// Raw oracle from an evaluation function. `exact` asserts that the
    /// function returns true cylinder masses independent of the precision;
    /// pass `false` for genuine approximation oracles.
    pub fn from_fn<F>(exact: bool, eval: F) -> Self
    where
        F: Fn(&BitString, u32) -> Result<Rational, MeasureError> + Send + Sync + 'static,
    {
        MeasureOracle::wrap(Kind::Custom {
            exact,
            eval: Box::new(eval),
        })
    }

    pub fn is_exact(&self) -> bool {
        match &*self.kind {
            Kind::Custom { exact, .. } => *exact,
            _ => true,
        }
    }

    /// The mass of the cylinder at `sigma`, to within `2^-precision` for
    /// approximate oracles; exact oracles ignore `precision`.
    pub fn value(&self, sigma: &BitString, precision: u32) -> Result<Rational, MeasureError> {
        match &*self.kind {
            Kind::Lebesgue => Ok(Rational::pow2_neg(sigma.len() as u32)),
            Kind::Dirac(point) => Ok(if point.starts_with(sigma) {
                Rational::one()
            } else {
                Rational::zero()
            }),
            Kind::Bernoulli { p, q } => {
                let ones = sigma.bits().filter(|&b| b).count() as u32;
                let zeros = sigma.len() as u32 - ones;
                Ok(pow(p, ones) * pow(q, zeros))
            }
            Kind::FiniteRational(m) => Ok(m.value(sigma)),
            Kind::TreeUniform(tree) => Ok(tree_uniform_value(tree, sigma)),
            Kind::Assignment(a) => a.value(sigma),
            Kind::Mixture(parts) => {
                let mut total = Rational::zero();
                for (w, part) in parts {
                    total += &(w * &part.value(sigma, precision)?);
                }
                Ok(total)
            }
            Kind::Custom { eval, .. } => eval(sigma, precision),
        }
    }

    /// The exact mass at `sigma`; fails on approximate oracles.
    pub fn exact_value(&self, sigma: &BitString) -> Result<Rational, MeasureError> {
        if !self.is_exact() {
            return Err(MeasureError::NotExact);
        }
        self.value(sigma, 0)
    }

    /// One-line description used in reports.
    pub fn describe(&self) -> String {
        match &*self.kind {
            Kind::Lebesgue => "lebesgue".to_string(),
            Kind::Dirac(p) => format!("dirac:{}", p),
            Kind::Bernoulli { p, .. } => format!("bernoulli:{}", p),
            Kind::FiniteRational(m) => format!("finite-rational[{}]", m.weights.len()),
            Kind::TreeUniform(t) => format!("tree-uniform[depth {}]", t.depth()),
            Kind::Assignment(a) => {
                format!("assignment[depth {}, {}]", a.depth(), a.extension())
            }
            Kind::Mixture(parts) => {
                let inner: Vec<String> = parts
                    .iter()
                    .map(|(w, p)| format!("{} {}", w, p.describe()))
                    .collect();
                format!("mixture[{}]", inner.join(" + "))
            }
            Kind::Custom { exact, .. } => {
                format!("custom[{}]", if *exact { "exact" } else { "approximate" })
            }
        }
    }
}

impl fmt::Debug for MeasureOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MeasureOracle({})", self.describe())
    }
}

fn pow(base: &Rational, exp: u32) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..exp {
        acc = acc * base;
    }
    acc
}

fn tree_uniform_value(tree: &FiniteTree, sigma: &BitString) -> Rational {
    let in_tree_len = sigma.len().min(tree.depth());
    let mut mass = Rational::one();
    for i in 0..in_tree_len {
        let node = sigma.prefix(i + 1);
        if !tree.contains(&node) {
            return Rational::zero();
        }
        let sibling = node.sibling().expect("node is nonempty");
        if tree.contains(&sibling) {
            mass.halve();
        }
    }
    if sigma.len() > tree.depth() {
        // uniform extension below the tree
        mass = mass * Rational::pow2_neg((sigma.len() - tree.depth()) as u32);
    }
    mass
}
