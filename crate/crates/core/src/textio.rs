//! Shared plumbing for the line-oriented text formats.

use std::fmt;

/// A malformed input file; carries the 1-based line number of the offense.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl fmt::Display) -> Self {
        ParseError {
            line,
            message: message.to_string(),
        }
    }
}

/// Iterate the meaningful lines of a file: trimmed, skipping blanks and
/// `#` comments, yielding 1-based line numbers.
pub fn meaningful_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Check the `expected` header on the first meaningful line.
pub fn expect_header<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    expected: &str,
) -> Result<(), ParseError> {
    match lines.next() {
        Some((_, l)) if l == expected => Ok(()),
        Some((n, l)) => Err(ParseError::new(
            n,
            format!("expected header {expected:?}, found {l:?}"),
        )),
        None => Err(ParseError::new(1, format!("empty file, expected header {expected:?}"))),
    }
}
