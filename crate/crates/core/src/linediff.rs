//! Line-level minimal diffs and the number-indexed unified formats.

use std::fmt::Write as _;
use std::ops::Range;

use similar::{capture_diff_slices, Algorithm, DiffOp};

use crate::error::{EditError, Result};
use crate::patch::{Patched, Rung};
use crate::text::{LineSequence, NO_NEWLINE_MARKER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunKind {
    Keep,
    Delete,
    Insert,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffRun {
    pub kind: RunKind,
    pub lines: Vec<String>,
}

/// Ordered keep/delete/insert runs turning a source into a target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineDiffScript {
    pub runs: Vec<DiffRun>,
    pub source_trailing_newline: bool,
    pub target_trailing_newline: bool,
}

/// One zero-context change: source lines `old` (0-based, half-open) are
/// replaced by target lines `new`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineChange {
    pub old: Range<usize>,
    pub new: Range<usize>,
}

impl LineDiffScript {
    pub fn is_identity(&self) -> bool {
        self.runs.iter().all(|r| r.kind == RunKind::Keep)
            && self.source_trailing_newline == self.target_trailing_newline
    }

    /// Zero-context change regions in source/target coordinates.
    pub fn changes(&self) -> Vec<LineChange> {
        let mut out: Vec<LineChange> = Vec::new();
        let (mut old, mut new) = (0, 0);
        let mut pending: Option<LineChange> = None;
        for run in &self.runs {
            let n = run.lines.len();
            match run.kind {
                RunKind::Keep => {
                    out.extend(pending.take());
                    old += n;
                    new += n;
                }
                RunKind::Delete => {
                    let c = pending.get_or_insert(LineChange { old: old..old, new: new..new });
                    old += n;
                    c.old.end = old;
                }
                RunKind::Insert => {
                    let c = pending.get_or_insert(LineChange { old: old..old, new: new..new });
                    new += n;
                    c.new.end = new;
                }
            }
        }
        out.extend(pending);
        out
    }

    /// Replays the script: keep and insert runs concatenated.
    pub fn target(&self) -> LineSequence {
        let lines = self
            .runs
            .iter()
            .filter(|r| r.kind != RunKind::Delete)
            .flat_map(|r| r.lines.iter().cloned())
            .collect();
        LineSequence::new(lines, self.target_trailing_newline)
    }

    fn ops(&self) -> Vec<(RunKind, &str)> {
        self.runs
            .iter()
            .flat_map(|r| r.lines.iter().map(move |l| (r.kind, l.as_str())))
            .collect()
    }

    fn source_len(&self) -> usize {
        self.runs.iter().filter(|r| r.kind != RunKind::Insert).map(|r| r.lines.len()).sum()
    }

    fn target_len(&self) -> usize {
        self.runs.iter().filter(|r| r.kind != RunKind::Delete).map(|r| r.lines.len()).sum()
    }
}

/// Minimal (LCS) line diff. Within each changed region deletions precede
/// insertions.
pub fn compute_line_diff(source: &LineSequence, target: &LineSequence) -> LineDiffScript {
    let old_keys = source.keys();
    let new_keys = target.keys();
    let ops = capture_diff_slices(Algorithm::Myers, &old_keys, &new_keys);

    let mut runs: Vec<DiffRun> = Vec::new();
    let mut push = |kind: RunKind, lines: &[String]| {
        if lines.is_empty() {
            return;
        }
        match runs.last_mut() {
            Some(last) if last.kind == kind => last.lines.extend_from_slice(lines),
            _ => runs.push(DiffRun { kind, lines: lines.to_vec() }),
        }
    };
    // Accumulate each changed region so deletes are emitted before inserts.
    let mut del: Range<usize> = 0..0;
    let mut ins: Range<usize> = 0..0;
    let flush = |del: &mut Range<usize>, ins: &mut Range<usize>, push: &mut dyn FnMut(RunKind, &[String])| {
        push(RunKind::Delete, &source.lines[del.clone()]);
        push(RunKind::Insert, &target.lines[ins.clone()]);
        *del = 0..0;
        *ins = 0..0;
    };
    let widen = |r: &mut Range<usize>, start: usize, len: usize| {
        if r.start == r.end {
            *r = start..start + len;
        } else {
            debug_assert_eq!(r.end, start);
            r.end = start + len;
        }
    };
    for op in ops {
        match op {
            DiffOp::Equal { old_index, len, .. } => {
                flush(&mut del, &mut ins, &mut push);
                push(RunKind::Keep, &source.lines[old_index..old_index + len]);
            }
            DiffOp::Delete { old_index, old_len, .. } => widen(&mut del, old_index, old_len),
            DiffOp::Insert { new_index, new_len, .. } => widen(&mut ins, new_index, new_len),
            DiffOp::Replace { old_index, old_len, new_index, new_len } => {
                widen(&mut del, old_index, old_len);
                widen(&mut ins, new_index, new_len);
            }
        }
    }
    flush(&mut del, &mut ins, &mut push);

    LineDiffScript {
        runs,
        source_trailing_newline: source.trailing_newline,
        target_trailing_newline: target.trailing_newline,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LineTag {
    Context,
    Deleted,
    Inserted,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HunkLine {
    pub tag: LineTag,
    pub text: String,
}

impl HunkLine {
    pub fn new(tag: LineTag, text: impl Into<String>) -> Self {
        HunkLine { tag, text: text.into() }
    }
}

/// A unified-diff hunk located by line numbers.
///
/// Starts follow the conventional unified format: 1-based, and for a side
/// with zero lines the start names the line preceding the hunk. Starts are
/// `None` for hunks parsed from a bare `@@ .. @@` header.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NumberedHunk {
    pub old_start: Option<usize>,
    pub new_start: Option<usize>,
    pub body: Vec<HunkLine>,
    /// The old side of this hunk ends the file without a newline.
    pub old_missing_newline: bool,
    /// The new side of this hunk ends the file without a newline.
    pub new_missing_newline: bool,
}

impl NumberedHunk {
    pub fn old_count(&self) -> usize {
        self.body.iter().filter(|l| l.tag != LineTag::Inserted).count()
    }

    pub fn new_count(&self) -> usize {
        self.body.iter().filter(|l| l.tag != LineTag::Deleted).count()
    }

    pub fn old_lines(&self) -> Vec<String> {
        self.side(LineTag::Inserted)
    }

    pub fn new_lines(&self) -> Vec<String> {
        self.side(LineTag::Deleted)
    }

    pub fn without_positions(mut self) -> Self {
        self.old_start = None;
        self.new_start = None;
        self
    }

    fn side(&self, skip: LineTag) -> Vec<String> {
        self.body.iter().filter(|l| l.tag != skip).map(|l| l.text.clone()).collect()
    }

    /// 0-based index of the first source line touched (or the insertion point).
    fn old_index(&self) -> Option<usize> {
        let start = self.old_start?;
        if self.old_count() == 0 {
            Some(start)
        } else {
            start.checked_sub(1)
        }
    }
}

/// Groups a script into hunks with `context` surrounding lines. Changes whose
/// context windows touch or overlap share one hunk.
pub fn group_hunks(script: &LineDiffScript, context: usize) -> Vec<NumberedHunk> {
    let ops = script.ops();
    // Maximal runs of non-keep ops, as op-index ranges.
    let mut blocks: Vec<Range<usize>> = Vec::new();
    for (i, (kind, _)) in ops.iter().enumerate() {
        if *kind == RunKind::Keep {
            continue;
        }
        match blocks.last_mut() {
            Some(b) if b.end == i => b.end = i + 1,
            _ => blocks.push(i..i + 1),
        }
    }
    let mut groups: Vec<Range<usize>> = Vec::new();
    for b in blocks {
        match groups.last_mut() {
            Some(g) if b.start - g.end <= context.saturating_mul(2) => g.end = b.end,
            _ => groups.push(b),
        }
    }

    // Old/new positions before each op.
    let mut old_at = Vec::with_capacity(ops.len() + 1);
    let mut new_at = Vec::with_capacity(ops.len() + 1);
    let (mut o, mut n) = (0usize, 0usize);
    for (kind, _) in &ops {
        old_at.push(o);
        new_at.push(n);
        match kind {
            RunKind::Keep => {
                o += 1;
                n += 1;
            }
            RunKind::Delete => o += 1,
            RunKind::Insert => n += 1,
        }
    }
    old_at.push(o);
    new_at.push(n);
    let old_len = script.source_len();
    let new_len = script.target_len();
    let old_open = !script.source_trailing_newline && old_len > 0;
    let new_open = !script.target_trailing_newline && new_len > 0;

    groups
        .into_iter()
        .map(|g| {
            let start = g.start.saturating_sub(context);
            let end = g.end.saturating_add(context).min(ops.len());
            let body: Vec<HunkLine> = ops[start..end]
                .iter()
                .map(|(kind, text)| {
                    let tag = match kind {
                        RunKind::Keep => LineTag::Context,
                        RunKind::Delete => LineTag::Deleted,
                        RunKind::Insert => LineTag::Inserted,
                    };
                    HunkLine::new(tag, *text)
                })
                .collect();
            let mut hunk = NumberedHunk {
                old_start: None,
                new_start: None,
                body,
                old_missing_newline: old_open && old_at[end] == old_len,
                new_missing_newline: new_open && new_at[end] == new_len,
            };
            let oc = hunk.old_count();
            let nc = hunk.new_count();
            hunk.old_start = Some(if oc == 0 { old_at[start] } else { old_at[start] + 1 });
            hunk.new_start = Some(if nc == 0 { new_at[start] } else { new_at[start] + 1 });
            hunk.old_missing_newline &= oc > 0;
            hunk.new_missing_newline &= nc > 0;
            hunk
        })
        .collect()
}

/// A single hunk whose body spans the whole script (every line, unchanged
/// ones as context).
pub(crate) fn whole_hunk(script: &LineDiffScript) -> NumberedHunk {
    let mut hunks = group_hunks(script, usize::MAX / 4);
    match hunks.len() {
        0 => {
            let body: Vec<HunkLine> = script
                .ops()
                .into_iter()
                .map(|(_, t)| HunkLine::new(LineTag::Context, t))
                .collect();
            let open = !script.source_trailing_newline && !body.is_empty();
            NumberedHunk {
                old_start: None,
                new_start: None,
                body,
                old_missing_newline: open,
                new_missing_newline: open,
            }
        }
        _ => hunks.swap_remove(0).without_positions(),
    }
}

fn side_count(count: usize, start: usize) -> String {
    if count == 1 {
        start.to_string()
    } else {
        format!("{start},{count}")
    }
}

pub(crate) fn render_body(hunk: &NumberedHunk, out: &mut String) {
    let last_old = hunk.body.iter().rposition(|l| l.tag != LineTag::Inserted);
    let last_new = hunk.body.iter().rposition(|l| l.tag != LineTag::Deleted);
    for (i, line) in hunk.body.iter().enumerate() {
        let prefix = match line.tag {
            LineTag::Context => ' ',
            LineTag::Deleted => '-',
            LineTag::Inserted => '+',
        };
        out.push(prefix);
        out.push_str(&line.text);
        out.push('\n');
        let old_mark = hunk.old_missing_newline && last_old == Some(i);
        let new_mark = hunk.new_missing_newline && last_new == Some(i);
        if old_mark || new_mark {
            out.push_str(NO_NEWLINE_MARKER);
            out.push('\n');
        }
    }
}

/// Renders hunks as unified diff text. Without line headers every hunk
/// opens with the bare `@@ .. @@` marker.
pub fn render_unified(hunks: &[NumberedHunk], with_line_header: bool) -> String {
    let mut out = String::new();
    for h in hunks {
        match (with_line_header, h.old_start, h.new_start) {
            (true, Some(os), Some(ns)) => {
                let _ = writeln!(
                    out,
                    "@@ -{} +{} @@",
                    side_count(h.old_count(), os),
                    side_count(h.new_count(), ns)
                );
            }
            _ => out.push_str("@@ .. @@\n"),
        }
        render_body(h, &mut out);
    }
    out
}

fn parse_range(s: &str) -> Option<usize> {
    let start = s.split(',').next()?;
    start.parse().ok()
}

/// Parses a `@@ -a,b +c,d @@` header into its two starts. Counts are not
/// needed: they are recomputed from the body.
fn parse_numbered_header(line: &str) -> Option<(usize, usize)> {
    let rest = line.strip_prefix("@@")?.trim_start();
    let mut parts = rest.split_whitespace();
    let old = parts.next()?.strip_prefix('-')?;
    let new = parts.next()?.strip_prefix('+')?;
    if parts.next()? != "@@" {
        return None;
    }
    Some((parse_range(old)?, parse_range(new)?))
}

/// Splits text into lines, dropping the empty piece after a final newline.
pub(crate) fn text_lines(text: &str) -> Vec<&str> {
    let mut lines: Vec<&str> = text.split('\n').collect();
    if lines.last() == Some(&"") {
        lines.pop();
    }
    lines
}

/// Parses one hunk body. An empty body line is read as a blank context line
/// unless it trails the hunk.
pub(crate) fn parse_body(lines: &[&str]) -> Result<NumberedHunk> {
    let mut lines = lines;
    while let Some((last, rest)) = lines.split_last() {
        if last.trim_end_matches('\r').is_empty() {
            lines = rest;
        } else {
            break;
        }
    }
    let mut hunk = NumberedHunk {
        old_start: None,
        new_start: None,
        body: Vec::with_capacity(lines.len()),
        old_missing_newline: false,
        new_missing_newline: false,
    };
    for raw in lines {
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let (tag, text) = match raw.chars().next() {
            Some(' ') => (LineTag::Context, &raw[1..]),
            Some('-') => (LineTag::Deleted, &raw[1..]),
            Some('+') => (LineTag::Inserted, &raw[1..]),
            Some('\\') => {
                match hunk.body.last().map(|l| l.tag) {
                    Some(LineTag::Context) => {
                        hunk.old_missing_newline = true;
                        hunk.new_missing_newline = true;
                    }
                    Some(LineTag::Deleted) => hunk.old_missing_newline = true,
                    Some(LineTag::Inserted) => hunk.new_missing_newline = true,
                    None => return Err(EditError::malformed("newline marker before any body line")),
                }
                continue;
            }
            None => (LineTag::Context, ""),
            Some(_) => return Err(EditError::malformed(format!("unknown body line prefix in {raw:?}"))),
        };
        hunk.body.push(HunkLine::new(tag, text));
    }
    Ok(hunk)
}

/// Lenient unified diff parser: skips text before the first header,
/// tolerates missing counts and a missing final newline, and stops at a
/// closing code fence.
pub fn parse_unified(text: &str) -> Result<Vec<NumberedHunk>> {
    let lines = text_lines(text);
    let mut hunks = Vec::new();
    let mut i = lines.iter().position(|l| l.starts_with("@@")).ok_or_else(|| EditError::malformed("no hunk header"))?;
    while i < lines.len() {
        let header = lines[i];
        let mut j = i + 1;
        while j < lines.len() && !lines[j].starts_with("@@") && !lines[j].starts_with("```") {
            j += 1;
        }
        let mut hunk = parse_body(&lines[i + 1..j])?;
        if let Some((os, ns)) = parse_numbered_header(header) {
            hunk.old_start = Some(os);
            hunk.new_start = Some(ns);
        }
        hunks.push(hunk);
        if j < lines.len() && lines[j].starts_with("```") {
            break;
        }
        i = j;
    }
    Ok(hunks)
}

/// Applies hunks purely by their line numbers. Body text of context and
/// deleted lines is never compared with the source.
pub fn apply_numbered(source: &LineSequence, hunks: &[NumberedHunk]) -> Result<Patched> {
    let len = source.len();
    let mut order: Vec<(usize, &NumberedHunk)> = Vec::with_capacity(hunks.len());
    for h in hunks {
        let idx = h.old_index().ok_or_else(|| EditError::malformed("hunk without line numbers"))?;
        if idx > len || idx + h.old_count() > len {
            return Err(EditError::malformed(format!(
                "hunk at line {} exceeds the {len}-line source",
                h.old_start.unwrap_or(0)
            )));
        }
        order.push((idx, h));
    }
    order.sort_by_key(|(idx, _)| *idx);

    let mut out: Vec<String> = Vec::with_capacity(len);
    let mut trailing = source.trailing_newline;
    let mut cursor = 0;
    for (idx, h) in order {
        if idx < cursor {
            return Err(EditError::malformed("overlapping hunks"));
        }
        out.extend_from_slice(&source.lines[cursor..idx]);
        let mut pos = idx;
        for line in &h.body {
            match line.tag {
                LineTag::Context => {
                    out.push(source.lines[pos].clone());
                    pos += 1;
                }
                LineTag::Deleted => pos += 1,
                LineTag::Inserted => out.push(line.text.clone()),
            }
        }
        if pos == len {
            trailing = !h.new_missing_newline;
        }
        cursor = pos;
    }
    out.extend_from_slice(&source.lines[cursor..]);
    Ok(Patched {
        text: LineSequence::new(out, trailing),
        tolerance_used: vec![Rung::Exact; hunks.len()],
    })
}

/// Source rendered with `<n>: ` line-number prefixes.
pub fn render_numbered_source(source: &LineSequence) -> String {
    let mut out = String::new();
    for (i, line) in source.lines.iter().enumerate() {
        let _ = writeln!(out, "{}: {}", i + 1, line);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(lines: &[&str]) -> LineSequence {
        LineSequence::new(lines.iter().map(|s| s.to_string()).collect(), true)
    }

    fn kinds(script: &LineDiffScript) -> Vec<(RunKind, Vec<&str>)> {
        script.runs.iter().map(|r| (r.kind, r.lines.iter().map(String::as_str).collect())).collect()
    }

    #[test]
    fn identity_is_single_keep_run() {
        let s = seq(&["a", "b", "c"]);
        let script = compute_line_diff(&s, &s);
        assert_eq!(kinds(&script), vec![(RunKind::Keep, vec!["a", "b", "c"])]);
        assert!(script.is_identity());
    }

    #[test]
    fn substitution_deletes_before_inserting() {
        let script = compute_line_diff(&seq(&["a", "b", "c"]), &seq(&["a", "x", "c"]));
        assert_eq!(
            kinds(&script),
            vec![
                (RunKind::Keep, vec!["a"]),
                (RunKind::Delete, vec!["b"]),
                (RunKind::Insert, vec!["x"]),
                (RunKind::Keep, vec!["c"]),
            ]
        );
    }

    #[test]
    fn zero_context_substitution_hunk() {
        let script = compute_line_diff(&seq(&["a", "b", "c"]), &seq(&["a", "x", "c"]));
        let hunks = group_hunks(&script, 0);
        assert_eq!(hunks.len(), 1);
        let h = &hunks[0];
        assert_eq!((h.old_start, h.old_count(), h.new_start, h.new_count()), (Some(2), 1, Some(2), 1));
    }

    fn ten_lines() -> Vec<String> {
        (1..=10).map(|i| format!("l{i}")).collect()
    }

    #[test]
    fn overlapping_windows_merge() {
        let src = LineSequence::new(ten_lines(), true);
        let mut tgt = src.clone();
        tgt.lines[1] = "X".into();
        tgt.lines[5] = "Y".into();
        let hunks = group_hunks(&compute_line_diff(&src, &tgt), 3);
        assert_eq!(hunks.len(), 1);
        assert_eq!(hunks[0].old_start, Some(1));
        assert_eq!(hunks[0].old_count(), 9);
    }

    #[test]
    fn distant_changes_stay_apart() {
        let src = LineSequence::new((1..=30).map(|i| format!("l{i}")).collect(), true);
        let mut tgt = src.clone();
        tgt.lines[1] = "X".into();
        tgt.lines[19] = "Y".into();
        assert_eq!(group_hunks(&compute_line_diff(&src, &tgt), 3).len(), 2);
    }

    #[test]
    fn zero_context_keeps_one_line_gap() {
        let src = seq(&["a", "b", "c"]);
        let tgt = seq(&["x", "b", "y"]);
        assert_eq!(group_hunks(&compute_line_diff(&src, &tgt), 0).len(), 2);
    }

    #[test]
    fn renders_conventional_headers() {
        let hunks = group_hunks(&compute_line_diff(&seq(&["a", "b", "c"]), &seq(&["a", "x", "c"])), 0);
        assert_eq!(render_unified(&hunks, true), "@@ -2 +2 @@\n-b\n+x\n");
        assert_eq!(render_unified(&hunks, false), "@@ .. @@\n-b\n+x\n");
        assert_eq!(render_unified(&[], true), "");
    }

    #[test]
    fn pure_insertion_header_names_preceding_line() {
        let hunks = group_hunks(&compute_line_diff(&seq(&["a", "b"]), &seq(&["a", "n", "m", "b"])), 0);
        assert_eq!(render_unified(&hunks, true), "@@ -1,0 +2,2 @@\n+n\n+m\n");
    }

    #[test]
    fn parse_is_lenient() {
        let hunks = parse_unified("@@ -2 +2 @@\n-b\n+x").unwrap();
        assert_eq!(hunks.len(), 1);
        assert_eq!(hunks[0].old_start, Some(2));
        assert_eq!(hunks[0].old_lines(), vec!["b"]);
        assert_eq!(hunks[0].new_lines(), vec!["x"]);
        let with_noise = parse_unified("--- a.py\n+++ b.py\n@@ -2 +2 @@\n-b\n+x\n").unwrap();
        assert_eq!(with_noise, hunks);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(matches!(parse_unified("no header here"), Err(EditError::MalformedDiff(_))));
        assert!(matches!(parse_unified("@@ -1 +1 @@\n?what"), Err(EditError::MalformedDiff(_))));
    }

    #[test]
    fn missing_newline_marker_round_trips() {
        let src = LineSequence::from_text("a\nb");
        let tgt = LineSequence::from_text("a\nc");
        let hunks = group_hunks(&compute_line_diff(&src, &tgt), 3);
        let text = render_unified(&hunks, true);
        assert_eq!(text, format!("@@ -1,2 +1,2 @@\n a\n-b\n{NO_NEWLINE_MARKER}\n+c\n{NO_NEWLINE_MARKER}\n"));
        assert_eq!(parse_unified(&text).unwrap(), hunks);
        assert_eq!(apply_numbered(&src, &hunks).unwrap().text, tgt);
    }

    #[test]
    fn numbered_apply_basics() {
        let src = seq(&["a", "b", "c"]);
        let hunk = |start: usize, del: &str| NumberedHunk {
            old_start: Some(start),
            new_start: Some(start),
            body: vec![HunkLine::new(LineTag::Deleted, del), HunkLine::new(LineTag::Inserted, "x")],
            old_missing_newline: false,
            new_missing_newline: false,
        };
        assert_eq!(apply_numbered(&src, &[hunk(2, "b")]).unwrap().text, seq(&["a", "x", "c"]));
        // content of the deleted line is not checked
        assert_eq!(apply_numbered(&src, &[hunk(2, "Z")]).unwrap().text, seq(&["a", "x", "c"]));
        assert!(matches!(apply_numbered(&src, &[hunk(9, "b")]), Err(EditError::MalformedDiff(_))));
        assert!(matches!(
            apply_numbered(&src, &[hunk(2, "b"), hunk(2, "b")]),
            Err(EditError::MalformedDiff(_))
        ));
    }

    #[test]
    fn numbered_source_rendering() {
        assert_eq!(render_numbered_source(&seq(&["a", "b"])), "1: a\n2: b\n");
        assert_eq!(render_numbered_source(&LineSequence::default()), "");
        assert_eq!(render_numbered_source(&seq(&["", "x"])), "1: \n2: x\n");
    }
}
