//! Finite-depth exact cylinder assignments and their text format.

use super::MeasureError;
use crate::bits::BitString;
use crate::exec;
use crate::rational::Rational;
use crate::textio::{expect_header, meaningful_lines, ParseError};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Levels deeper than this would need more than 2^32 stored values.
pub(crate) const DEPTH_LIMIT: usize = 32;

/// What an assignment means below its stored depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtensionPolicy {
    /// Split each leaf mass evenly among both children, all the way down.
    Uniform,
    /// All leaf mass follows the all-zeros extension; the measure has an atom
    /// at `leaf ⌢ 000...` for every leaf with positive mass.
    LeftAtom,
    /// Queries below the depth are errors.
    Stop,
}

impl fmt::Display for ExtensionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExtensionPolicy::Uniform => "uniform",
            ExtensionPolicy::LeftAtom => "left-atom",
            ExtensionPolicy::Stop => "stop",
        })
    }
}

impl FromStr for ExtensionPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(ExtensionPolicy::Uniform),
            "left-atom" => Ok(ExtensionPolicy::LeftAtom),
            "stop" => Ok(ExtensionPolicy::Stop),
            other => Err(format!(
                "unknown extension policy {other:?}, expected uniform, left-atom, or stop"
            )),
        }
    }
}

/// An exact rational measure representation to a finite depth: one value per
/// string of length `<= depth`, additive at every internal node, with mass 1
/// at the root, plus an [`ExtensionPolicy`] for queries below the depth.
///
/// Values are stored per level in lexicographic order, so lookups are
/// rank-indexed and never allocate.
#[derive(Clone, PartialEq, Eq)]
pub struct CylinderAssignment {
    depth: usize,
    levels: Vec<Vec<Rational>>,
    extension: ExtensionPolicy,
}

impl CylinderAssignment {
    /// Validate and wrap a full table of levels (`levels[l]` has `2^l`
    /// entries in lexicographic order).
    pub fn new(
        levels: Vec<Vec<Rational>>,
        extension: ExtensionPolicy,
    ) -> Result<Self, MeasureError> {
        assert!(!levels.is_empty(), "need at least the root level");
        let depth = levels.len() - 1;
        if depth > DEPTH_LIMIT {
            return Err(MeasureError::DepthLimit {
                depth,
                limit: DEPTH_LIMIT,
            });
        }
        for (l, row) in levels.iter().enumerate() {
            assert_eq!(row.len(), 1usize << l, "level {l} has the wrong width");
        }
        let a = CylinderAssignment {
            depth,
            levels,
            extension,
        };
        a.validate()?;
        Ok(a)
    }

    /// Build from leaf masses alone; parents are the exact pairwise sums, so
    /// additivity holds by construction.
    pub fn from_leaves(
        leaves: Vec<Rational>,
        extension: ExtensionPolicy,
    ) -> Result<Self, MeasureError> {
        let depth = leaves.len().trailing_zeros() as usize;
        assert_eq!(leaves.len(), 1usize << depth, "leaf count must be a power of two");
        if depth > DEPTH_LIMIT {
            return Err(MeasureError::DepthLimit {
                depth,
                limit: DEPTH_LIMIT,
            });
        }
        let mut levels = vec![Vec::new(); depth + 1];
        levels[depth] = leaves;
        for l in (0..depth).rev() {
            let child = &levels[l + 1];
            levels[l] = exec::map_ranks(1u64 << l, |r| {
                &child[(2 * r) as usize] + &child[(2 * r + 1) as usize]
            });
        }
        let a = CylinderAssignment {
            depth,
            levels,
            extension,
        };
        a.validate_root_and_range()?;
        Ok(a)
    }

    /// Truncate an exact oracle to a finite-depth assignment.
    pub fn truncate(
        oracle: &super::MeasureOracle,
        depth: usize,
        extension: ExtensionPolicy,
    ) -> Result<Self, MeasureError> {
        if !oracle.is_exact() {
            return Err(MeasureError::NotExact);
        }
        if depth > DEPTH_LIMIT {
            return Err(MeasureError::DepthLimit {
                depth,
                limit: DEPTH_LIMIT,
            });
        }
        let leaves = exec::try_map_level(depth, |s| oracle.exact_value(s))?;
        Self::from_leaves(leaves, extension)
    }

    fn validate_root_and_range(&self) -> Result<(), MeasureError> {
        if self.levels[0][0] != Rational::one() {
            return Err(MeasureError::RootMassNotOne {
                value: self.levels[0][0].clone(),
            });
        }
        for (l, row) in self.levels.iter().enumerate() {
            let bad = row
                .iter()
                .position(|v| v.is_negative() || *v > Rational::one());
            if let Some(r) = bad {
                return Err(MeasureError::ValueOutOfRange {
                    sigma: BitString::from_rank(l, r as u64),
                });
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), MeasureError> {
        self.validate_root_and_range()?;
        for l in 0..self.depth {
            let parents = &self.levels[l];
            let children = &self.levels[l + 1];
            let ok = exec::map_ranks(1u64 << l, |r| {
                parents[r as usize] == &children[(2 * r) as usize] + &children[(2 * r + 1) as usize]
            });
            if let Some(r) = ok.iter().position(|&b| !b) {
                return Err(MeasureError::AdditivityViolation {
                    sigma: BitString::from_rank(l, r as u64),
                });
            }
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn extension(&self) -> ExtensionPolicy {
        self.extension
    }

    /// Mass of the cylinder at `sigma`, applying the extension policy below
    /// the stored depth.
    pub fn value(&self, sigma: &BitString) -> Result<Rational, MeasureError> {
        if sigma.len() <= self.depth {
            return Ok(self.levels[sigma.len()][sigma.rank() as usize].clone());
        }
        let head = sigma.prefix(self.depth);
        let base = self.levels[self.depth][head.rank() as usize].clone();
        match self.extension {
            ExtensionPolicy::Uniform => {
                Ok(base * Rational::pow2_neg((sigma.len() - self.depth) as u32))
            }
            ExtensionPolicy::LeftAtom => {
                if (self.depth..sigma.len()).all(|i| !sigma.bit(i)) {
                    Ok(base)
                } else {
                    Ok(Rational::zero())
                }
            }
            ExtensionPolicy::Stop => Err(MeasureError::BelowDepth {
                sigma: sigma.clone(),
            }),
        }
    }

    /// The stored values of one level, rank-indexed (lexicographic).
    pub fn level_values(&self, level: usize) -> &[Rational] {
        &self.levels[level]
    }

    pub fn max_at_level(&self, level: usize) -> &Rational {
        self.levels[level]
            .iter()
            .max()
            .expect("levels are nonempty")
    }

    /// True when every stored value is dyadic.
    pub fn is_dyadic(&self) -> bool {
        self.levels
            .iter()
            .all(|row| row.iter().all(|v| v.is_dyadic()))
    }

    /// First string (level order, then lexicographic) with zero mass, if any.
    pub fn first_zero(&self) -> Option<BitString> {
        for (l, row) in self.levels.iter().enumerate() {
            if let Some(r) = row.iter().position(|v| v.is_zero()) {
                return Some(BitString::from_rank(l, r as u64));
            }
        }
        None
    }

    /// Canonical text form (`measure v1`).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("measure v1\n");
        out.push_str(&format!("depth: {}\n", self.depth));
        out.push_str(&format!("extension: {}\n", self.extension));
        for (l, row) in self.levels.iter().enumerate() {
            for (r, v) in row.iter().enumerate() {
                let s = BitString::from_rank(l, r as u64);
                out.push_str(&format!("{} {}\n", s.to_token(), v));
            }
        }
        out
    }

    /// Parse the `measure v1` text format, verifying totality, the root
    /// mass, additivity, and the value range; violations name the offending
    /// string and line.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut lines = meaningful_lines(text);
        expect_header(&mut lines, "measure v1")?;
        let (dline, dtext) = lines
            .next()
            .ok_or_else(|| ParseError::new(2, "missing 'depth:' line"))?;
        let depth: usize = dtext
            .strip_prefix("depth:")
            .ok_or_else(|| ParseError::new(dline, "expected 'depth: <n>'"))?
            .trim()
            .parse()
            .map_err(|_| ParseError::new(dline, "depth is not a small integer"))?;
        if depth > DEPTH_LIMIT {
            return Err(ParseError::new(
                dline,
                format!("depth {depth} exceeds the limit of {DEPTH_LIMIT}"),
            ));
        }
        let (eline, etext) = lines
            .next()
            .ok_or_else(|| ParseError::new(dline, "missing 'extension:' line"))?;
        let extension: ExtensionPolicy = etext
            .strip_prefix("extension:")
            .ok_or_else(|| ParseError::new(eline, "expected 'extension: <policy>'"))?
            .trim()
            .parse()
            .map_err(|e| ParseError::new(eline, e))?;

        let mut seen: BTreeMap<BitString, (usize, Rational)> = BTreeMap::new();
        for (n, line) in lines {
            let (tok, val) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| ParseError::new(n, "expected '<bits|@> <rational>'"))?;
            let sigma = BitString::parse_token(tok).map_err(|e| ParseError::new(n, e))?;
            if sigma.len() > depth {
                return Err(ParseError::new(
                    n,
                    format!("string {} is longer than the declared depth", sigma.to_token()),
                ));
            }
            let value: Rational = val.trim().parse().map_err(|e| ParseError::new(n, e))?;
            if seen.insert(sigma.clone(), (n, value)).is_some() {
                return Err(ParseError::new(
                    n,
                    format!("duplicate value for {}", sigma.to_token()),
                ));
            }
        }
        // totality, then structural invariants; errors carry the offender
        let mut levels: Vec<Vec<Rational>> = Vec::with_capacity(depth + 1);
        for l in 0..=depth {
            let mut row = Vec::with_capacity(1 << l);
            for r in 0..(1u64 << l) {
                let sigma = BitString::from_rank(l, r);
                match seen.get(&sigma) {
                    Some((_, v)) => row.push(v.clone()),
                    None => {
                        return Err(ParseError::new(
                            0,
                            format!("missing value for {}", sigma.to_token()),
                        ))
                    }
                }
            }
            levels.push(row);
        }
        CylinderAssignment::new(levels, extension).map_err(|e| {
            let line = match &e {
                MeasureError::RootMassNotOne { .. } => seen
                    .get(&BitString::empty())
                    .map(|(n, _)| *n)
                    .unwrap_or(0),
                MeasureError::AdditivityViolation { sigma }
                | MeasureError::ValueOutOfRange { sigma } => {
                    seen.get(sigma).map(|(n, _)| *n).unwrap_or(0)
                }
                _ => 0,
            };
            ParseError::new(line, e)
        })
    }
}

impl fmt::Debug for CylinderAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CylinderAssignment {{ depth: {}, extension: {} }}",
            self.depth, self.extension
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;
    use crate::measures::MeasureOracle;

    fn lebesgue_to(depth: usize) -> CylinderAssignment {
        CylinderAssignment::truncate(&MeasureOracle::lebesgue(), depth, ExtensionPolicy::Uniform)
            .unwrap()
    }

    #[test]
    fn truncate_and_lookup() {
        let a = lebesgue_to(3);
        assert_eq!(a.value(&bs("01")).unwrap(), Rational::new(1, 4));
        assert_eq!(a.value(&BitString::empty()).unwrap(), Rational::one());
        // below depth, uniform extension keeps halving
        assert_eq!(a.value(&bs("01011")).unwrap(), Rational::pow2_neg(5));
    }

    #[test]
    fn stop_policy_rejects_deep_queries() {
        let a = CylinderAssignment::truncate(
            &MeasureOracle::lebesgue(),
            2,
            ExtensionPolicy::Stop,
        )
        .unwrap();
        assert!(matches!(
            a.value(&bs("010")),
            Err(MeasureError::BelowDepth { .. })
        ));
    }

    #[test]
    fn left_atom_extension() {
        let a = CylinderAssignment::truncate(
            &MeasureOracle::lebesgue(),
            1,
            ExtensionPolicy::LeftAtom,
        )
        .unwrap();
        assert_eq!(a.value(&bs("100")).unwrap(), Rational::new(1, 2));
        assert_eq!(a.value(&bs("101")).unwrap(), Rational::zero());
    }

    #[test]
    fn bad_tables_are_rejected() {
        let err = CylinderAssignment::new(
            vec![
                vec![Rational::one()],
                vec![Rational::new(1, 3), Rational::new(1, 3)],
            ],
            ExtensionPolicy::Uniform,
        )
        .unwrap_err();
        assert_eq!(
            err,
            MeasureError::AdditivityViolation {
                sigma: BitString::empty()
            }
        );

        let err = CylinderAssignment::new(
            vec![vec![Rational::new(2, 1)]],
            ExtensionPolicy::Uniform,
        )
        .unwrap_err();
        assert!(matches!(err, MeasureError::RootMassNotOne { .. }));
    }

    #[test]
    fn text_roundtrip() {
        let a = lebesgue_to(2);
        let text = a.to_text();
        let b = CylinderAssignment::parse(&text).unwrap();
        assert_eq!(a, b);
        assert_eq!(text, b.to_text());
    }

    #[test]
    fn parse_reports_offender() {
        let text = "measure v1\ndepth: 1\nextension: uniform\n@ 1/1\n0 1/3\n1 1/3\n";
        let err = CylinderAssignment::parse(text).unwrap_err();
        assert!(err.message.contains("additivity"), "{}", err.message);
        assert_eq!(err.line, 4); // the parent line carries the violation

        let text = "measure v1\ndepth: 1\nextension: uniform\n@ 1/1\n0 1/2\n";
        let err = CylinderAssignment::parse(text).unwrap_err();
        assert!(err.message.contains("missing value for 1"), "{}", err.message);
    }
}
