//! Shared machinery for content-addressed hunk generation: anchor uniqueness
//! checks over interned lines, replacement splicing, and verification that
//! hunks stay uniquely locatable when applied one after another.

use std::collections::HashMap;
use std::ops::Range;

use crate::contentdiff::ContentHunk;
use crate::linediff::{LineChange, NumberedHunk};
use crate::text::{LineSequence, Span};

/// A zero-context edit: source lines `old` become `lines`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Edit {
    pub old: Range<usize>,
    pub lines: Vec<String>,
    /// `lines` end the target file without a newline.
    pub missing_newline: bool,
}

impl Edit {
    pub fn from_change(change: &LineChange, target: &LineSequence) -> Self {
        Edit {
            old: change.old.clone(),
            lines: target.lines[change.new.clone()].to_vec(),
            missing_newline: change.new.end == target.len() && target.open_end(),
        }
    }

    /// Converts a zero-context numbered hunk. Hunks without positions cannot
    /// be placed and yield `None`.
    pub fn from_hunk(hunk: &NumberedHunk) -> Option<Self> {
        let start = hunk.old_start?;
        let count = hunk.old_count();
        let begin = if count == 0 { start } else { start.checked_sub(1)? };
        Some(Edit {
            old: begin..begin + count,
            lines: hunk.new_lines(),
            missing_newline: hunk.new_missing_newline,
        })
    }
}

/// Source lines covered by `range` with `edits` (sorted, inside `range`)
/// applied. Also reports whether the result ends the file without a newline.
pub(crate) fn splice_edits(source: &LineSequence, range: Range<usize>, edits: &[Edit]) -> (Vec<String>, bool) {
    let mut out = Vec::with_capacity(range.len());
    let mut cursor = range.start;
    for e in edits {
        debug_assert!(e.old.start >= cursor && e.old.end <= range.end);
        out.extend_from_slice(&source.lines[cursor..e.old.start]);
        out.extend(e.lines.iter().cloned());
        cursor = e.old.end;
    }
    let tail_from_source = cursor < range.end;
    out.extend_from_slice(&source.lines[cursor..range.end]);
    let at_end = range.end == source.len();
    let missing = at_end
        && if tail_from_source {
            source.open_end()
        } else {
            edits.last().is_some_and(|e| e.missing_newline && !e.lines.is_empty())
        };
    (out, missing)
}

/// Builds the content hunk rewriting `range` of the source.
pub(crate) fn make_hunk(source: &LineSequence, range: Range<usize>, edits: &[Edit]) -> ContentHunk {
    let (replacement, replacement_missing_newline) = splice_edits(source, range.clone(), edits);
    ContentHunk {
        anchor: source.lines[range.clone()].to_vec(),
        replacement,
        anchor_missing_newline: range.end == source.len() && source.open_end(),
        replacement_missing_newline,
        anchor_span: Some(Span::from_range(range)),
    }
}

/// Interned view of a source for fast exact anchor counting. Line identity
/// includes whether a line is an unterminated final line, matching the
/// exact rung of the patcher.
pub(crate) struct AnchorIndex {
    ids: Vec<u32>,
    table: HashMap<(String, bool), u32>,
}

impl AnchorIndex {
    pub fn new(source: &LineSequence) -> Self {
        let mut index = AnchorIndex { ids: Vec::with_capacity(source.len()), table: HashMap::new() };
        let keys: Vec<(String, bool)> = source.keys().into_iter().map(|(l, o)| (l.to_owned(), o)).collect();
        for key in keys {
            let id = index.intern(key);
            index.ids.push(id);
        }
        index
    }

    fn intern(&mut self, key: (String, bool)) -> u32 {
        let next = self.table.len() as u32;
        *self.table.entry(key).or_insert(next)
    }

    fn intern_lines(&mut self, lines: &[String], missing_newline: bool) -> Vec<u32> {
        let last = lines.len().wrapping_sub(1);
        lines
            .iter()
            .enumerate()
            .map(|(i, l)| self.intern((l.clone(), missing_newline && i == last)))
            .collect()
    }

    /// Occurrences of `pattern` in `hay`, saturating at 2.
    fn occurrences(hay: &[u32], pattern: &[u32]) -> usize {
        if pattern.is_empty() {
            return if hay.is_empty() { 1 } else { 2 };
        }
        if pattern.len() > hay.len() {
            return 0;
        }
        let mut found = 0;
        for start in 0..=hay.len() - pattern.len() {
            if hay[start] == pattern[0] && hay[start..start + pattern.len()] == *pattern {
                found += 1;
                if found == 2 {
                    break;
                }
            }
        }
        found
    }

    /// Whether source lines `range` occur exactly once in the source.
    pub fn unique(&self, range: Range<usize>) -> bool {
        Self::occurrences(&self.ids, &self.ids[range]) == 1
    }

    /// Simulates applying `regions` (sorted, disjoint) in order and returns
    /// the first whose anchor is not unique in the source or in the text it
    /// is applied to.
    pub fn first_conflict(&mut self, regions: &[(Range<usize>, Vec<String>, bool)]) -> Option<usize> {
        let mut text = self.ids.clone();
        let mut offset: isize = 0;
        for (i, (range, replacement, missing)) in regions.iter().enumerate() {
            let pattern = &self.ids[range.clone()];
            if Self::occurrences(&self.ids, pattern) != 1 || Self::occurrences(&text, pattern) != 1 {
                return Some(i);
            }
            let start = (range.start as isize + offset) as usize;
            let end = (range.end as isize + offset) as usize;
            let new_ids = self.intern_lines(replacement, *missing);
            offset += new_ids.len() as isize - range.len() as isize;
            text.splice(start..end, new_ids);
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniqueness_counts_exact_runs() {
        let src = LineSequence::from_text("x\ny\nx\nz\n");
        let idx = AnchorIndex::new(&src);
        assert!(!idx.unique(0..1));
        assert!(idx.unique(1..2));
        assert!(idx.unique(1..4));
    }

    #[test]
    fn open_final_line_is_distinct() {
        let src = LineSequence::from_text("x\nx");
        let idx = AnchorIndex::new(&src);
        assert!(idx.unique(0..1));
        assert!(idx.unique(1..2));
    }

    #[test]
    fn earlier_replacement_can_create_a_duplicate() {
        let src = LineSequence::from_text("a\nb\nc\n");
        let mut idx = AnchorIndex::new(&src);
        let regions = vec![(0..1, vec!["c".to_string()], false), (2..3, vec!["d".to_string()], false)];
        assert_eq!(idx.first_conflict(&regions), Some(1));
    }
}
