#![allow(dead_code)]

use std::collections::HashSet;
use std::path::PathBuf;

use adaedit_core::{BlockTree, ContentHunk, LineSequence, Span};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Exact occurrences of a hunk's anchor in `source`, by brute force over
/// every start position. The unterminated last line only matches an anchor
/// flagged as ending without a newline.
pub fn anchor_occurrences(source: &LineSequence, hunk: &ContentHunk) -> usize {
    let n = source.lines.len();
    let k = hunk.anchor.len();
    if k == 0 {
        return if n == 0 { 1 } else { n + 1 };
    }
    if k > n {
        return 0;
    }
    let open = !source.lines.is_empty() && !source.trailing_newline;
    (0..=n - k)
        .filter(|&i| source.lines[i..i + k] == hunk.anchor[..])
        .filter(|&i| (i + k == n && open) == hunk.anchor_missing_newline)
        .count()
}

/// Spans of every contiguous run of siblings (including single nodes).
pub fn contiguous_runs(tree: &BlockTree) -> HashSet<Span> {
    let mut spans = HashSet::new();
    for node in tree.nodes() {
        spans.insert(node.span);
        let kids = &node.children;
        for i in 0..kids.len() {
            for j in i + 1..kids.len() {
                if tree.node(kids[j - 1]).span.end + 1 != tree.node(kids[j]).span.start {
                    break;
                }
                spans.insert(Span::new(tree.node(kids[i]).span.start, tree.node(kids[j]).span.end));
            }
        }
    }
    spans
}

/// Source lines of a 1-based inclusive span.
pub fn span_text(source: &LineSequence, span: Span) -> Vec<String> {
    if span.end < span.start {
        return Vec::new();
    }
    source.lines[span.start - 1..span.end].to_vec()
}
