//! Content-addressed diffs: hunks located by a unique run of source lines.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::anchor::{make_hunk, splice_edits, AnchorIndex, Edit};
use crate::error::{EditError, Result};
use crate::linediff::{compute_line_diff, parse_body, render_body, text_lines, whole_hunk};
use crate::text::{LineSequence, Span, NO_NEWLINE_MARKER};

pub const SEARCH_OPEN: &str = "<<<<<<< SEARCH";
pub const SEARCH_DIVIDER: &str = "=======";
pub const SEARCH_CLOSE: &str = ">>>>>>> REPLACE";

/// One content-addressed edit: replace the unique run `anchor` with
/// `replacement`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContentHunk {
    pub anchor: Vec<String>,
    pub replacement: Vec<String>,
    /// The anchor's last line ends the file without a newline.
    pub anchor_missing_newline: bool,
    /// The replacement's last line ends the file without a newline.
    pub replacement_missing_newline: bool,
    /// Source location the hunk was generated from; absent on parsed hunks.
    pub anchor_span: Option<Span>,
}

impl ContentHunk {
    pub fn new(anchor: Vec<String>, replacement: Vec<String>) -> Self {
        ContentHunk {
            anchor,
            replacement,
            anchor_missing_newline: false,
            replacement_missing_newline: false,
            anchor_span: None,
        }
    }

    pub fn without_span(mut self) -> Self {
        self.anchor_span = None;
        self
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HunkStyle {
    /// Every anchor line deleted, every replacement line inserted.
    #[default]
    Rewrite,
    /// Unified-diff body with shared context lines.
    Interlaced,
    /// `<<<<<<< SEARCH` / `=======` / `>>>>>>> REPLACE` blocks.
    SearchReplace,
}

impl HunkStyle {
    pub const ALL: [HunkStyle; 3] = [HunkStyle::Rewrite, HunkStyle::Interlaced, HunkStyle::SearchReplace];

    pub fn name(self) -> &'static str {
        match self {
            HunkStyle::Rewrite => "rewrite",
            HunkStyle::Interlaced => "interlaced",
            HunkStyle::SearchReplace => "searchreplace",
        }
    }
}

impl fmt::Display for HunkStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HunkStyle {
    type Err = EditError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_', '/'], "").as_str() {
            "rewrite" => Ok(HunkStyle::Rewrite),
            "interlaced" | "unified" => Ok(HunkStyle::Interlaced),
            "searchreplace" => Ok(HunkStyle::SearchReplace),
            _ => Err(EditError::UnknownFormat(s.to_owned())),
        }
    }
}

struct Region {
    range: Range<usize>,
    edits: Vec<Edit>,
}

fn grow(range: &mut Range<usize>, len: usize) -> bool {
    let before = range.clone();
    range.start = range.start.saturating_sub(1);
    range.end = (range.end + 1).min(len);
    *range != before
}

fn merge_touching(regions: &mut Vec<Region>) {
    regions.sort_by_key(|r| (r.range.start, r.range.end));
    let mut merged: Vec<Region> = Vec::with_capacity(regions.len());
    for r in regions.drain(..) {
        match merged.last_mut() {
            Some(last) if r.range.start <= last.range.end => {
                last.range.end = last.range.end.max(r.range.end);
                last.edits.extend(r.edits);
            }
            _ => merged.push(r),
        }
    }
    *regions = merged;
}

/// Generates content-addressed hunks. Each hunk starts from one zero-context
/// change, takes `min_context` lines of context per side, then widens one
/// line per side until its anchor is unique. Touching anchors merge.
pub fn generate_content_diff(
    source: &LineSequence,
    target: &LineSequence,
    min_context: usize,
) -> Result<Vec<ContentHunk>> {
    let script = compute_line_diff(source, target);
    if script.is_identity() {
        return Err(EditError::NoChange);
    }
    let n = source.len();
    let mut index = AnchorIndex::new(source);
    let mut regions: Vec<Region> = script
        .changes()
        .iter()
        .map(|c| Region { range: c.old.clone(), edits: vec![Edit::from_change(c, target)] })
        .collect();
    for r in &mut regions {
        for _ in 0..min_context {
            grow(&mut r.range, n);
        }
        while !index.unique(r.range.clone()) && grow(&mut r.range, n) {}
    }
    loop {
        merge_touching(&mut regions);
        let planned: Vec<_> = regions
            .iter()
            .map(|r| {
                let (lines, missing) = splice_edits(source, r.range.clone(), &r.edits);
                (r.range.clone(), lines, missing)
            })
            .collect();
        match index.first_conflict(&planned) {
            Some(i) if grow(&mut regions[i].range, n) => {}
            _ => break,
        }
    }
    Ok(regions.iter().map(|r| make_hunk(source, r.range.clone(), &r.edits)).collect())
}

fn push_marked(out: &mut String, prefix: &str, lines: &[String], missing_newline: bool) -> Result<()> {
    for line in lines {
        out.push_str(prefix);
        out.push_str(line);
        out.push('\n');
    }
    if missing_newline && !lines.is_empty() {
        out.push_str(NO_NEWLINE_MARKER);
        out.push('\n');
    }
    Ok(())
}

fn check_delimiters(lines: &[String]) -> Result<()> {
    for line in lines {
        if [SEARCH_OPEN, SEARCH_DIVIDER, SEARCH_CLOSE, NO_NEWLINE_MARKER].contains(&line.as_str()) {
            return Err(EditError::DelimiterCollision { line: line.clone() });
        }
    }
    Ok(())
}

/// Renders hunks in the given style.
pub fn render_hunks(hunks: &[ContentHunk], style: HunkStyle) -> Result<String> {
    let mut out = String::new();
    for h in hunks {
        match style {
            HunkStyle::Rewrite => {
                out.push_str("@@ .. @@\n");
                push_marked(&mut out, "-", &h.anchor, h.anchor_missing_newline)?;
                push_marked(&mut out, "+", &h.replacement, h.replacement_missing_newline)?;
            }
            HunkStyle::Interlaced => {
                let old = LineSequence::new(h.anchor.clone(), !h.anchor_missing_newline);
                let new = LineSequence::new(h.replacement.clone(), !h.replacement_missing_newline);
                out.push_str("@@ .. @@\n");
                render_body(&whole_hunk(&compute_line_diff(&old, &new)), &mut out);
            }
            HunkStyle::SearchReplace => {
                check_delimiters(&h.anchor)?;
                check_delimiters(&h.replacement)?;
                out.push_str(SEARCH_OPEN);
                out.push('\n');
                push_marked(&mut out, "", &h.anchor, h.anchor_missing_newline)?;
                out.push_str(SEARCH_DIVIDER);
                out.push('\n');
                push_marked(&mut out, "", &h.replacement, h.replacement_missing_newline)?;
                out.push_str(SEARCH_CLOSE);
                out.push('\n');
            }
        }
    }
    Ok(out)
}

/// Drops a leading fence line and a trailing fence line, if present.
pub(crate) fn strip_fence<'a>(lines: &[&'a str]) -> Vec<&'a str> {
    let mut lines: Vec<&str> = lines.to_vec();
    while lines.first().is_some_and(|l| l.trim().is_empty()) {
        lines.remove(0);
    }
    if lines.first().is_some_and(|l| l.trim_start().starts_with("```")) {
        lines.remove(0);
    }
    // Only truly empty lines: " " is a blank context line.
    while lines.last().is_some_and(|l| l.trim_end_matches('\r').is_empty()) {
        lines.pop();
    }
    if lines.last().is_some_and(|l| l.trim() == "```") {
        lines.pop();
    }
    lines
}

fn parse_search_replace(lines: &[&str]) -> Result<Vec<ContentHunk>> {
    enum State {
        Outside,
        Search,
        Replace,
    }
    let mut state = State::Outside;
    let mut hunks = Vec::new();
    let mut current = ContentHunk::new(Vec::new(), Vec::new());
    for raw in lines {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        match state {
            State::Outside => {
                if line.trim_end() == SEARCH_OPEN {
                    state = State::Search;
                }
            }
            State::Search => {
                if line.trim_end() == SEARCH_DIVIDER {
                    state = State::Replace;
                } else if line == NO_NEWLINE_MARKER {
                    current.anchor_missing_newline = true;
                } else if line.trim_end() == SEARCH_OPEN || line.trim_end() == SEARCH_CLOSE {
                    return Err(EditError::malformed("search block without divider"));
                } else {
                    current.anchor.push(line.to_owned());
                }
            }
            State::Replace => {
                if line.trim_end() == SEARCH_CLOSE {
                    hunks.push(std::mem::replace(&mut current, ContentHunk::new(Vec::new(), Vec::new())));
                    state = State::Outside;
                } else if line == NO_NEWLINE_MARKER {
                    current.replacement_missing_newline = true;
                } else if line.trim_end() == SEARCH_OPEN || line.trim_end() == SEARCH_DIVIDER {
                    return Err(EditError::malformed("replace block without terminator"));
                } else {
                    current.replacement.push(line.to_owned());
                }
            }
        }
    }
    if !matches!(state, State::Outside) {
        return Err(EditError::malformed("unterminated search/replace block"));
    }
    if hunks.is_empty() {
        return Err(EditError::malformed("no search/replace block"));
    }
    Ok(hunks)
}

/// Parses diff text rendered in `style`. Surrounding code fences and text
/// before the first hunk are ignored.
pub fn parse_content_diff(text: &str, style: HunkStyle) -> Result<Vec<ContentHunk>> {
    let lines = strip_fence(&text_lines(text));
    if style == HunkStyle::SearchReplace {
        return parse_search_replace(&lines);
    }
    let first = lines
        .iter()
        .position(|l| l.starts_with("@@"))
        .ok_or_else(|| EditError::malformed("no `@@` hunk header"))?;
    let mut hunks = Vec::new();
    let mut i = first;
    while i < lines.len() {
        let mut j = i + 1;
        while j < lines.len() && !lines[j].starts_with("@@") {
            j += 1;
        }
        let body = parse_body(&lines[i + 1..j])?;
        hunks.push(ContentHunk {
            anchor: body.old_lines(),
            replacement: body.new_lines(),
            anchor_missing_newline: body.old_missing_newline,
            replacement_missing_newline: body.new_missing_newline,
            anchor_span: None,
        });
        i = j;
    }
    Ok(hunks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patch::apply_content_diff;

    fn seq(v: &[&str]) -> LineSequence {
        LineSequence::new(v.iter().map(|s| s.to_string()).collect(), true)
    }

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn ambiguous_line_grows_one_step() {
        let src = seq(&["x = 1", "y = 2", "x = 1", "z = 3"]);
        let tgt = seq(&["x = 1", "y = 2", "x = 9", "z = 3"]);
        let hunks = generate_content_diff(&src, &tgt, 0).unwrap();
        assert_eq!(hunks.len(), 1);
        assert_eq!(hunks[0].anchor, strings(&["y = 2", "x = 1", "z = 3"]));
        assert_eq!(hunks[0].replacement, strings(&["y = 2", "x = 9", "z = 3"]));
        assert_eq!(hunks[0].anchor_span, Some(Span::new(2, 4)));
    }

    fn ten() -> LineSequence {
        LineSequence::new((1..=10).map(|i| format!("line {i}")).collect(), true)
    }

    #[test]
    fn unique_change_needs_no_context() {
        let src = ten();
        let mut tgt = src.clone();
        tgt.lines[4] = "changed".into();
        let hunks = generate_content_diff(&src, &tgt, 0).unwrap();
        assert_eq!(hunks[0].anchor, strings(&["line 5"]));
        let hunks = generate_content_diff(&src, &tgt, 3).unwrap();
        assert_eq!(hunks[0].anchor.len(), 7);
        assert_eq!(hunks[0].anchor_span, Some(Span::new(2, 8)));
    }

    #[test]
    fn context_is_clamped_at_file_edges() {
        let src = ten();
        let mut tgt = src.clone();
        tgt.lines[1] = "changed".into();
        let hunks = generate_content_diff(&src, &tgt, 3).unwrap();
        assert_eq!(hunks[0].anchor_span, Some(Span::new(1, 5)));
    }

    #[test]
    fn identical_inputs_are_rejected() {
        assert_eq!(generate_content_diff(&ten(), &ten(), 0), Err(EditError::NoChange));
    }

    #[test]
    fn insertion_into_empty_file() {
        let tgt = seq(&["a"]);
        let hunks = generate_content_diff(&LineSequence::default(), &tgt, 0).unwrap();
        assert_eq!(hunks.len(), 1);
        assert!(hunks[0].anchor.is_empty());
        assert_eq!(apply_content_diff(&LineSequence::default(), &hunks).unwrap().text, tgt);
    }

    #[test]
    fn pure_insertion_uses_neighbours() {
        let src = seq(&["a", "b", "c"]);
        let tgt = seq(&["a", "b", "new", "c"]);
        let hunks = generate_content_diff(&src, &tgt, 0).unwrap();
        assert_eq!(hunks[0].anchor, strings(&["b", "c"]));
        assert_eq!(hunks[0].replacement, strings(&["b", "new", "c"]));
    }

    fn sample_hunk() -> ContentHunk {
        ContentHunk::new(strings(&["y = 2", "x = 1", "z = 3"]), strings(&["y = 2", "x = 9", "z = 3"]))
    }

    #[test]
    fn renders_rewrite_and_interlaced() {
        let h = [sample_hunk()];
        assert_eq!(
            render_hunks(&h, HunkStyle::Rewrite).unwrap(),
            "@@ .. @@\n-y = 2\n-x = 1\n-z = 3\n+y = 2\n+x = 9\n+z = 3\n"
        );
        assert_eq!(render_hunks(&h, HunkStyle::Interlaced).unwrap(), "@@ .. @@\n y = 2\n-x = 1\n+x = 9\n z = 3\n");
        assert_eq!(
            render_hunks(&h, HunkStyle::SearchReplace).unwrap(),
            "<<<<<<< SEARCH\ny = 2\nx = 1\nz = 3\n=======\ny = 2\nx = 9\nz = 3\n>>>>>>> REPLACE\n"
        );
    }

    #[test]
    fn delimiter_lines_collide() {
        let h = ContentHunk::new(strings(&["a", "=======", "b"]), strings(&["c"]));
        assert!(matches!(
            render_hunks(&[h], HunkStyle::SearchReplace),
            Err(EditError::DelimiterCollision { .. })
        ));
    }

    #[test]
    fn styles_round_trip() {
        let mut open = ContentHunk::new(strings(&["q", ""]), strings(&["r"]));
        open.anchor_missing_newline = true;
        open.replacement_missing_newline = true;
        let hunks = vec![sample_hunk(), ContentHunk::new(vec![], strings(&["only"])), open];
        for style in HunkStyle::ALL {
            let text = render_hunks(&hunks, style).unwrap();
            assert_eq!(parse_content_diff(&text, style).unwrap(), hunks, "{style}");
        }
    }

    #[test]
    fn trailing_blank_context_survives() {
        let h = vec![ContentHunk::new(strings(&["a", ""]), strings(&["b", ""]))];
        let text = render_hunks(&h, HunkStyle::Interlaced).unwrap();
        assert!(text.ends_with("\n \n"));
        assert_eq!(parse_content_diff(&text, HunkStyle::Interlaced).unwrap(), h);
    }

    #[test]
    fn fences_are_ignored() {
        let hunks = parse_content_diff("```diff\n@@ .. @@\n-a\n+b\n```", HunkStyle::Rewrite).unwrap();
        assert_eq!(hunks, vec![ContentHunk::new(strings(&["a"]), strings(&["b"]))]);
    }

    #[test]
    fn garbage_is_malformed() {
        assert!(matches!(parse_content_diff("+++ garbage", HunkStyle::Rewrite), Err(EditError::MalformedDiff(_))));
        assert!(matches!(
            parse_content_diff("<<<<<<< SEARCH\na\n", HunkStyle::SearchReplace),
            Err(EditError::MalformedDiff(_))
        ));
    }
}
