//! Content-addressed patching.
//!
//! Each hunk is located by its anchor lines and replaced verbatim. When no
//! exact match exists the anchor is searched again under progressively looser
//! line normalizations; a normalization only ever affects *where* a hunk
//! applies, never the bytes written.

use std::ops::Range;

use serde::Serialize;

use crate::contentdiff::ContentHunk;
use crate::error::{EditError, Result};
use crate::text::LineSequence;

/// Normalization levels tried in order when locating an anchor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Rung {
    Exact = 0,
    TrailingWhitespace = 1,
    EdgeWhitespace = 2,
    BlankLines = 3,
}

impl Rung {
    pub const ALL: [Rung; 4] = [Rung::Exact, Rung::TrailingWhitespace, Rung::EdgeWhitespace, Rung::BlankLines];

    pub fn index(self) -> usize {
        self as usize
    }

    fn normalize(self, line: &str) -> &str {
        match self {
            Rung::Exact => line,
            Rung::TrailingWhitespace => line.trim_end(),
            Rung::EdgeWhitespace | Rung::BlankLines => line.trim(),
        }
    }
}

/// Successful patch result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Patched {
    pub text: LineSequence,
    /// Rung at which each hunk was located, in hunk order.
    pub tolerance_used: Vec<Rung>,
}

pub type PatchOutcome = Result<Patched>;

/// All line ranges of `haystack` matching `anchor` under `rung`.
///
/// At [`Rung::BlankLines`] blank lines are skipped on both sides; a match
/// then spans from its first to its last matched non-blank line, widened
/// over adjacent blank lines as far as the anchor itself has leading or
/// trailing blanks.
pub fn locate_anchor(haystack: &LineSequence, anchor: &[String], rung: Rung) -> Vec<Range<usize>> {
    let lines = &haystack.lines;
    if anchor.is_empty() || anchor.len() > lines.len() && rung != Rung::BlankLines {
        return Vec::new();
    }
    if rung == Rung::BlankLines {
        return locate_skipping_blanks(lines, anchor);
    }
    let first = rung.normalize(&anchor[0]);
    (0..=lines.len() - anchor.len())
        .filter(|&start| {
            rung.normalize(&lines[start]) == first
                && anchor
                    .iter()
                    .zip(&lines[start..])
                    .all(|(a, l)| rung.normalize(a) == rung.normalize(l))
        })
        .map(|start| start..start + anchor.len())
        .collect()
}

fn locate_skipping_blanks(lines: &[String], anchor: &[String]) -> Vec<Range<usize>> {
    let wanted: Vec<&str> = anchor.iter().map(|l| l.trim()).filter(|l| !l.is_empty()).collect();
    if wanted.is_empty() {
        return Vec::new();
    }
    let leading = anchor.iter().take_while(|l| l.trim().is_empty()).count();
    let trailing = anchor.iter().rev().take_while(|l| l.trim().is_empty()).count();
    let present: Vec<(usize, &str)> = lines
        .iter()
        .enumerate()
        .map(|(i, l)| (i, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    if wanted.len() > present.len() {
        return Vec::new();
    }
    let is_blank = |i: usize| lines[i].trim().is_empty();
    (0..=present.len() - wanted.len())
        .filter(|&k| present[k..k + wanted.len()].iter().zip(&wanted).all(|((_, l), w)| l == w))
        .map(|k| {
            let mut start = present[k].0;
            let mut end = present[k + wanted.len() - 1].0 + 1;
            let floor = start.saturating_sub(leading);
            while start > floor && is_blank(start - 1) {
                start -= 1;
            }
            let ceil = (end + trailing).min(lines.len());
            while end < ceil && is_blank(end) {
                end += 1;
            }
            start..end
        })
        .collect()
}

/// Locates a hunk, honouring its end-of-file flag at the exact rung.
pub(crate) fn locate_hunk(text: &LineSequence, hunk: &ContentHunk, rung: Rung) -> Vec<Range<usize>> {
    let mut found = locate_anchor(text, &hunk.anchor, rung);
    if rung == Rung::Exact {
        let n = text.len();
        let open = text.open_end();
        found.retain(|r| {
            let at_end = r.end == n;
            if hunk.anchor_missing_newline {
                at_end && open
            } else {
                !(at_end && open)
            }
        });
    }
    found
}

fn splice(text: &mut LineSequence, range: Range<usize>, hunk: &ContentHunk) {
    let at_end = range.end == text.len();
    text.lines.splice(range, hunk.replacement.iter().cloned());
    text.trailing_newline = !text.lines.is_empty() && if at_end { !hunk.replacement_missing_newline } else { text.trailing_newline };
}

/// Applies hunks one after another against the evolving text.
pub fn apply_content_diff(source: &LineSequence, hunks: &[ContentHunk]) -> PatchOutcome {
    let mut text = source.clone();
    let mut used = Vec::with_capacity(hunks.len());
    for (i, hunk) in hunks.iter().enumerate() {
        if hunk.anchor.is_empty() {
            if hunk.replacement.is_empty() {
                return Err(EditError::malformed(format!("hunk {i} is empty")));
            }
            text = LineSequence::new(hunk.replacement.clone(), !hunk.replacement_missing_newline);
            used.push(Rung::Exact);
            continue;
        }
        let mut located = None;
        for rung in Rung::ALL {
            let found = locate_hunk(&text, hunk, rung);
            match found.len() {
                0 => continue,
                1 => {
                    located = Some((rung, found[0].clone()));
                    break;
                }
                count => return Err(EditError::AmbiguousMatch { hunk: i, count }),
            }
        }
        let (rung, range) = located.ok_or(EditError::NoMatch { hunk: i })?;
        splice(&mut text, range, hunk);
        used.push(rung);
    }
    Ok(Patched { text, tolerance_used: used })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lines(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn seq(v: &[&str]) -> LineSequence {
        LineSequence::new(lines(v), true)
    }

    fn hunk(anchor: &[&str], replacement: &[&str]) -> ContentHunk {
        ContentHunk::new(lines(anchor), lines(replacement))
    }

    #[test]
    fn exact_single_match() {
        let hay = seq(&["a", "b", "c"]);
        assert_eq!(locate_anchor(&hay, &lines(&["b"]), Rung::Exact), vec![1..2]);
    }

    #[test]
    fn trailing_space_needs_rung_one() {
        let hay = seq(&["def f():", "    return 1  ", "x"]);
        let anchor = lines(&["def f():", "    return 1"]);
        assert!(locate_anchor(&hay, &anchor, Rung::Exact).is_empty());
        assert_eq!(locate_anchor(&hay, &anchor, Rung::TrailingWhitespace), vec![0..2]);
    }

    #[test]
    fn interior_blank_line_needs_rung_three() {
        let hay = seq(&["a", "b", "c"]);
        let anchor = lines(&["a", "", "b"]);
        for rung in [Rung::Exact, Rung::TrailingWhitespace, Rung::EdgeWhitespace] {
            assert!(locate_anchor(&hay, &anchor, rung).is_empty(), "{rung:?}");
        }
        assert_eq!(locate_anchor(&hay, &anchor, Rung::BlankLines), vec![0..2]);
    }

    #[test]
    fn ambiguous_anchor_fails() {
        let src = seq(&["x", "y", "x"]);
        assert_eq!(
            apply_content_diff(&src, &[hunk(&["x"], &["z"])]),
            Err(EditError::AmbiguousMatch { hunk: 0, count: 2 })
        );
    }

    #[test]
    fn relaxed_match_writes_replacement_verbatim() {
        let src = seq(&["a", "b  ", "c"]);
        let out = apply_content_diff(&src, &[hunk(&["b"], &["  B\t"])]).unwrap();
        assert_eq!(out.text, seq(&["a", "  B\t", "c"]));
        assert_eq!(out.tolerance_used, vec![Rung::TrailingWhitespace]);
    }

    #[test]
    fn missing_anchor_fails() {
        let src = seq(&["a"]);
        assert_eq!(apply_content_diff(&src, &[hunk(&["q"], &["z"])]), Err(EditError::NoMatch { hunk: 0 }));
    }

    #[test]
    fn empty_anchor_replaces_everything() {
        let out = apply_content_diff(&LineSequence::default(), &[hunk(&[], &["a", "b"])]).unwrap();
        assert_eq!(out.text, seq(&["a", "b"]));
    }

    #[test]
    fn exact_rung_respects_missing_newline() {
        let src = LineSequence::from_text("a\nb");
        let mut h = hunk(&["b"], &["c"]);
        assert!(locate_hunk(&src, &h, Rung::Exact).is_empty());
        h.anchor_missing_newline = true;
        h.replacement_missing_newline = true;
        assert_eq!(locate_hunk(&src, &h, Rung::Exact), vec![1..2]);
        assert_eq!(apply_content_diff(&src, &[h]).unwrap().text.to_text(), "a\nc");
    }
}
