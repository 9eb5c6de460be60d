//! Finite binary strings and the prefix order.

use smallvec::SmallVec;
use std::fmt;
use std::str::FromStr;

/// A finite binary string. As an index it names the cylinder of all infinite
/// sequences extending it; as a value it is an initial segment of a real.
///
/// The derived `Ord` is lexicographic with a proper prefix sorting before its
/// extensions, so restricted to strings of one length it is the usual
/// lexicographic order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BitString {
    bits: SmallVec<[bool; 16]>,
}

impl BitString {
    pub fn empty() -> Self {
        BitString::default()
    }

    pub fn zeros(n: usize) -> Self {
        BitString {
            bits: std::iter::repeat_n(false, n).collect(),
        }
    }

    pub fn ones(n: usize) -> Self {
        BitString {
            bits: std::iter::repeat_n(true, n).collect(),
        }
    }

    pub fn from_bits(bits: impl IntoIterator<Item = bool>) -> Self {
        BitString {
            bits: bits.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    /// The string extended by one bit.
    pub fn child(&self, bit: bool) -> Self {
        let mut c = self.clone();
        c.push(bit);
        c
    }

    /// The string minus its last bit; `None` for the empty string.
    pub fn parent(&self) -> Option<Self> {
        if self.is_empty() {
            None
        } else {
            Some(self.prefix(self.len() - 1))
        }
    }

    /// The other child of this string's parent; `None` for the empty string.
    pub fn sibling(&self) -> Option<Self> {
        self.parent().map(|p| p.child(!self.bit(self.len() - 1)))
    }

    /// The initial segment of length `n` (which must be `<= len`).
    pub fn prefix(&self, n: usize) -> Self {
        assert!(n <= self.len());
        BitString {
            bits: self.bits[..n].iter().copied().collect(),
        }
    }

    pub fn concat(&self, other: &BitString) -> Self {
        let mut c = self.clone();
        c.bits.extend(other.bits.iter().copied());
        c
    }

    /// True when `self` is an initial segment of `other` (not necessarily proper).
    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        self.len() <= other.len() && self.bits[..] == other.bits[..self.len()]
    }

    /// True when one string is a prefix of the other.
    pub fn comparable(&self, other: &BitString) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    /// The longest common initial segment of `x` and `y`.
    pub fn longest_common_prefix(x: &BitString, y: &BitString) -> BitString {
        let n = x
            .bits
            .iter()
            .zip(y.bits.iter())
            .take_while(|(a, b)| a == b)
            .count();
        x.prefix(n)
    }

    /// Lexicographic rank among strings of the same length. Only meaningful
    /// for strings short enough to index (`len <= 63`).
    pub fn rank(&self) -> u64 {
        assert!(self.len() <= 63, "string too long to rank");
        self.bits
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | u64::from(b))
    }

    /// The `rank`-th string of length `len`, in lexicographic order.
    pub fn from_rank(len: usize, rank: u64) -> Self {
        assert!(len <= 63, "level too deep to enumerate");
        debug_assert!(len == 63 || rank < (1u64 << len));
        BitString {
            bits: (0..len).map(|i| (rank >> (len - 1 - i)) & 1 == 1).collect(),
        }
    }

    /// All strings of length `len` in lexicographic order.
    pub fn all_of_length(len: usize) -> impl Iterator<Item = BitString> {
        assert!(len <= 32, "level too deep to enumerate");
        (0..(1u64 << len)).map(move |r| BitString::from_rank(len, r))
    }

    /// Token form used by the text file formats: `@` for the empty string.
    pub fn to_token(&self) -> String {
        if self.is_empty() {
            "@".to_string()
        } else {
            self.to_string()
        }
    }

    /// Inverse of [`to_token`](Self::to_token).
    pub fn parse_token(s: &str) -> Result<Self, BitStringParseError> {
        if s == "@" {
            Ok(BitString::empty())
        } else {
            s.parse()
        }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            f.write_str("\"<empty>\"")
        } else {
            write!(f, "\"{}\"", self)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("bad bit string {input:?}: expected only 0 and 1")]
pub struct BitStringParseError {
    pub input: String,
}

impl FromStr for BitString {
    type Err = BitStringParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut bits = SmallVec::new();
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => {
                    return Err(BitStringParseError {
                        input: s.to_string(),
                    })
                }
            }
        }
        Ok(BitString { bits })
    }
}

/// Convenience constructor for literals in tests and fixtures.
pub fn bs(s: &str) -> BitString {
    s.parse().expect("literal bit string")
}
