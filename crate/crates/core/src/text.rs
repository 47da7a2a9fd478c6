//! Line-decomposed text.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Marker line emitted after a diff line that ends the file without a newline.
pub const NO_NEWLINE_MARKER: &str = "\\ No newline at end of file";

/// Text split into newline-stripped lines.
///
/// `lines.join("\n")` plus a final `"\n"` when `trailing_newline` is set
/// reproduces the original bytes. An empty sequence never carries a trailing
/// newline.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct LineSequence {
    pub lines: Vec<String>,
    pub trailing_newline: bool,
}

impl LineSequence {
    pub fn new(lines: Vec<String>, trailing_newline: bool) -> Self {
        let trailing_newline = trailing_newline && !lines.is_empty();
        LineSequence { lines, trailing_newline }
    }

    pub fn from_text(text: &str) -> Self {
        if text.is_empty() {
            return LineSequence::default();
        }
        let trailing_newline = text.ends_with('\n');
        let body = if trailing_newline { &text[..text.len() - 1] } else { text };
        let lines = body.split('\n').map(str::to_owned).collect();
        LineSequence { lines, trailing_newline }
    }

    pub fn to_text(&self) -> String {
        let mut out = self.lines.join("\n");
        if self.trailing_newline {
            out.push('\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// True when the last line is not terminated by a newline.
    pub fn open_end(&self) -> bool {
        !self.lines.is_empty() && !self.trailing_newline
    }

    /// Comparison keys: the line text plus whether it is an unterminated
    /// final line. `"x"` at end of file without a newline differs from `"x\n"`.
    pub(crate) fn keys(&self) -> Vec<(&str, bool)> {
        let last = self.lines.len().wrapping_sub(1);
        let open = self.open_end();
        self.lines
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), open && i == last))
            .collect()
    }
}

impl From<&str> for LineSequence {
    fn from(text: &str) -> Self {
        LineSequence::from_text(text)
    }
}

impl fmt::Display for LineSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Inclusive, 1-based line range. `end == start - 1` denotes an empty range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        (self.end + 1).saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }

    pub fn contains_line(&self, line: usize) -> bool {
        self.start <= line && line <= self.end
    }

    pub fn contains(&self, other: Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: Span) -> bool {
        !self.is_empty() && !other.is_empty() && self.start <= other.end && other.start <= self.end
    }

    /// 0-based half-open index range.
    pub fn to_range(self) -> std::ops::Range<usize> {
        self.start.saturating_sub(1)..self.end
    }

    pub fn from_range(range: std::ops::Range<usize>) -> Self {
        Span { start: range.start + 1, end: range.end }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}..{}]", self.start, self.end)
    }
}
