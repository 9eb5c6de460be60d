//! Use-bounded monotone string maps (total truth-table reductions).

use super::TransformError;
use crate::bits::BitString;
use crate::textio::{expect_header, meaningful_lines, ParseError};
use std::fmt;

/// One table level: every input of length `use_len`, in lexicographic order,
/// mapped to an output.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Level {
    use_len: usize,
    outputs: Vec<BitString>,
}

/// A total monotone string map with a use bound: for each output length `n`
/// up to the table depth, every input of length `use(n)` is assigned an
/// output of length at least `n`, and outputs extend along input extension.
///
/// Such a map induces a total continuous function on Cantor space; `use` is
/// nondecreasing in `n`.
#[derive(Clone, PartialEq, Eq)]
pub struct MonotoneFunctional {
    levels: Vec<Level>,
}

impl MonotoneFunctional {
    /// Validate and build from `(use_len, outputs)` pairs for output lengths
    /// `1..=N`; `outputs` are indexed by input rank.
    pub fn new(levels: Vec<(usize, Vec<BitString>)>) -> Result<Self, TransformError> {
        let levels: Vec<Level> = levels
            .into_iter()
            .map(|(use_len, outputs)| Level { use_len, outputs })
            .collect();
        let f = MonotoneFunctional { levels };
        f.validate()?;
        Ok(f)
    }

    fn validate(&self) -> Result<(), TransformError> {
        for (i, level) in self.levels.iter().enumerate() {
            let n = i + 1;
            let expected = 1usize << level.use_len;
            if level.outputs.len() != expected {
                return Err(TransformError::WrongTableWidth {
                    level: n,
                    expected,
                    found: level.outputs.len(),
                });
            }
            for (r, out) in level.outputs.iter().enumerate() {
                if out.len() < n {
                    return Err(TransformError::OutputTooShort {
                        input: BitString::from_rank(level.use_len, r as u64),
                        level: n,
                    });
                }
            }
            if i > 0 {
                let prev = &self.levels[i - 1];
                if level.use_len < prev.use_len {
                    return Err(TransformError::UseDecreases { level: n });
                }
                let shift = level.use_len - prev.use_len;
                for (r, out) in level.outputs.iter().enumerate() {
                    let parent_rank = (r as u64) >> shift;
                    let parent_out = &prev.outputs[parent_rank as usize];
                    if !parent_out.is_prefix_of(out) {
                        return Err(TransformError::NonMonotone {
                            shorter: BitString::from_rank(prev.use_len, parent_rank),
                            longer: BitString::from_rank(level.use_len, r as u64),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Largest output length covered by the table.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Input length needed for `n` output bits (`1 <= n <= depth`).
    pub fn use_len(&self, n: usize) -> Result<usize, TransformError> {
        self.levels
            .get(n.checked_sub(1).ok_or(TransformError::TooShallow { needed_level: n })?)
            .map(|l| l.use_len)
            .ok_or(TransformError::TooShallow { needed_level: n })
    }

    /// Output at table level `n` for an input of length exactly `use(n)`.
    pub fn output_at(&self, n: usize, input: &BitString) -> Result<&BitString, TransformError> {
        let level = self
            .levels
            .get(n - 1)
            .ok_or(TransformError::TooShallow { needed_level: n })?;
        assert_eq!(input.len(), level.use_len, "input length must match use({n})");
        Ok(&level.outputs[input.rank() as usize])
    }

    /// The longest tabled output for `input`, if its length is a use level.
    pub fn output(&self, input: &BitString) -> Option<&BitString> {
        // deepest level wins: later levels extend earlier ones
        self.levels
            .iter()
            .rev()
            .find(|l| l.use_len == input.len())
            .map(|l| &l.outputs[input.rank() as usize])
    }

    /// The identity map: `use(n) = n`.
    pub fn identity(depth: usize) -> Self {
        let levels = (1..=depth)
            .map(|n| (n, BitString::all_of_length(n).collect()))
            .collect();
        MonotoneFunctional::new(levels).expect("identity is monotone")
    }

    /// Everything maps to zeros: `use(n) = n`, output `0^n`.
    pub fn constant_zero(depth: usize) -> Self {
        let levels = (1..=depth)
            .map(|n| {
                let outs = vec![BitString::zeros(n); 1 << n];
                (n, outs)
            })
            .collect();
        MonotoneFunctional::new(levels).expect("constant map is monotone")
    }

    /// Output bit `i` is the XOR of input bits `2i` and `2i+1`: `use(n) = 2n`.
    pub fn pairwise_xor(depth: usize) -> Self {
        let levels = (1..=depth)
            .map(|n| {
                let outs = BitString::all_of_length(2 * n)
                    .map(|input| {
                        BitString::from_bits(
                            (0..n).map(|i| input.bit(2 * i) ^ input.bit(2 * i + 1)),
                        )
                    })
                    .collect();
                (2 * n, outs)
            })
            .collect();
        MonotoneFunctional::new(levels).expect("xor map is monotone")
    }

    /// Keep the even-position bits: `use(n) = 2n`.
    pub fn drop_odd_bits(depth: usize) -> Self {
        let levels = (1..=depth)
            .map(|n| {
                let outs = BitString::all_of_length(2 * n)
                    .map(|input| BitString::from_bits((0..n).map(|i| input.bit(2 * i))))
                    .collect();
                (2 * n, outs)
            })
            .collect();
        MonotoneFunctional::new(levels).expect("projection is monotone")
    }

    /// Repeat each input bit twice: `use(n) = ceil(n/2)`, output length
    /// `2·use(n) >= n`.
    pub fn double_each_bit(depth: usize) -> Self {
        let levels = (1..=depth)
            .map(|n| {
                let k = n.div_ceil(2);
                let outs = BitString::all_of_length(k)
                    .map(|input| {
                        BitString::from_bits(input.bits().flat_map(|b| [b, b]))
                    })
                    .collect();
                (k, outs)
            })
            .collect();
        MonotoneFunctional::new(levels).expect("doubling is monotone")
    }

    /// Canonical text form (`functional v1`).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("functional v1\n");
        let uses: Vec<String> = self
            .levels
            .iter()
            .enumerate()
            .map(|(i, l)| format!("u({})={}", i + 1, l.use_len))
            .collect();
        out.push_str(&format!("use: {}\n", uses.join(",")));
        for level in &self.levels {
            for (r, o) in level.outputs.iter().enumerate() {
                let input = BitString::from_rank(level.use_len, r as u64);
                out.push_str(&format!("{} -> {}\n", input.to_token(), o.to_token()));
            }
        }
        out
    }

    /// Parse the `functional v1` format. Levels appear in order; within a
    /// level the lines may come in any order but must cover every input of
    /// that level's use length exactly once. Monotonicity violations name the
    /// offending pair.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut lines = meaningful_lines(text);
        expect_header(&mut lines, "functional v1")?;
        let (uline, utext) = lines
            .next()
            .ok_or_else(|| ParseError::new(2, "missing 'use:' line"))?;
        let body = utext
            .strip_prefix("use:")
            .ok_or_else(|| ParseError::new(uline, "expected 'use: u(1)=a1,...'"))?;
        let mut use_lens = Vec::new();
        for (i, part) in body.split(',').enumerate() {
            let part = part.trim();
            let want = format!("u({})=", i + 1);
            let value = part.strip_prefix(&want).ok_or_else(|| {
                ParseError::new(uline, format!("expected '{want}<len>', found {part:?}"))
            })?;
            let len: usize = value
                .parse()
                .map_err(|_| ParseError::new(uline, "use length is not a small integer"))?;
            if len > 32 {
                return Err(ParseError::new(uline, "use length exceeds the limit of 32"));
            }
            use_lens.push(len);
        }
        if use_lens.is_empty() {
            return Err(ParseError::new(uline, "empty use line"));
        }

        let mut levels = Vec::new();
        for (n, &use_len) in use_lens.iter().enumerate() {
            let expected = 1usize << use_len;
            let mut outputs: Vec<Option<BitString>> = vec![None; expected];
            for _ in 0..expected {
                let (ln, line) = lines.next().ok_or_else(|| {
                    ParseError::new(
                        0,
                        format!("table for output length {} is incomplete", n + 1),
                    )
                })?;
                let (input, output) = line.split_once("->").ok_or_else(|| {
                    ParseError::new(ln, "expected '<input bits> -> <output bits>'")
                })?;
                let input = BitString::parse_token(input.trim())
                    .map_err(|e| ParseError::new(ln, e))?;
                let output = BitString::parse_token(output.trim())
                    .map_err(|e| ParseError::new(ln, e))?;
                if input.len() != use_len {
                    return Err(ParseError::new(
                        ln,
                        format!(
                            "input {} has length {}, expected {} for output length {}",
                            input.to_token(),
                            input.len(),
                            use_len,
                            n + 1
                        ),
                    ));
                }
                let slot = &mut outputs[input.rank() as usize];
                if slot.is_some() {
                    return Err(ParseError::new(
                        ln,
                        format!("duplicate input {}", input.to_token()),
                    ));
                }
                *slot = Some(output);
            }
            let outputs: Vec<BitString> = outputs
                .into_iter()
                .map(|o| o.expect("all slots filled by count"))
                .collect();
            levels.push((use_len, outputs));
        }
        if let Some((ln, _)) = lines.next() {
            return Err(ParseError::new(ln, "unexpected line after the last table"));
        }
        MonotoneFunctional::new(levels).map_err(|e| ParseError::new(0, e))
    }
}

impl fmt::Debug for MonotoneFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let uses: Vec<usize> = self.levels.iter().map(|l| l.use_len).collect();
        write!(f, "MonotoneFunctional {{ use: {:?} }}", uses)
    }
}
