//! Structure-aware diffs: every anchor is the verbatim text of a contiguous
//! run of block-tree nodes.
//!
//! Each line change is first mapped to the smallest node run covering it.
//! A run whose text is not unique grows over adjacent siblings, preceding
//! and following in turn, and moves to the parent once no sibling is left.
//! Overlapping hunks merge, and hunks sharing a fine-grained ancestor are
//! consolidated into one hunk on that ancestor.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::anchor::{make_hunk, splice_edits, AnchorIndex, Edit};
use crate::blocktree::{build_block_tree, BlockTree, LanguageProfile, NodeId};
use crate::contentdiff::ContentHunk;
use crate::error::{EditError, Result};
use crate::linediff::{compute_line_diff, group_hunks, NumberedHunk};
use crate::text::{LineSequence, Span};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    /// Control statements, functions and classes are all blocks.
    #[default]
    Fine,
    /// Functions are the finest blocks.
    FunctionLevel,
}

impl Granularity {
    pub fn profile(self, base: &LanguageProfile) -> LanguageProfile {
        match self {
            Granularity::Fine => base.clone(),
            Granularity::FunctionLevel => base.function_level(),
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Granularity::Fine => "fine",
            Granularity::FunctionLevel => "function",
        })
    }
}

impl FromStr for Granularity {
    type Err = EditError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fine" | "block" => Ok(Granularity::Fine),
            "function" | "function-level" | "func" => Ok(Granularity::FunctionLevel),
            _ => Err(EditError::UnknownFormat(s.to_owned())),
        }
    }
}

/// A hunk attached to a contiguous run of sibling nodes (or one node).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuralHunk {
    pub nodes: Vec<NodeId>,
    pub anchor_span: Span,
    pub replacement: Vec<String>,
    pub replacement_missing_newline: bool,
    edits: Vec<Edit>,
    /// Side the next sibling expansion takes.
    prefer_preceding: bool,
}

impl StructuralHunk {
    fn new(tree: &BlockTree, nodes: Vec<NodeId>, mut edits: Vec<Edit>) -> Self {
        edits.sort_by_key(|e| (e.old.start, e.old.end));
        let mut h = StructuralHunk {
            anchor_span: tree.run_span(&nodes),
            nodes,
            replacement: Vec::new(),
            replacement_missing_newline: false,
            edits,
            prefer_preceding: true,
        };
        h.refresh(tree);
        h
    }

    fn set_nodes(&mut self, tree: &BlockTree, nodes: Vec<NodeId>) {
        self.anchor_span = tree.run_span(&nodes);
        self.nodes = nodes;
        self.refresh(tree);
    }

    fn refresh(&mut self, tree: &BlockTree) {
        let (lines, missing) = splice_edits(tree.source(), self.anchor_span.to_range(), &self.edits);
        self.replacement = lines;
        self.replacement_missing_newline = missing;
    }

    /// The content hunk this structural hunk renders to.
    pub fn to_content(&self, tree: &BlockTree) -> ContentHunk {
        make_hunk(tree.source(), self.anchor_span.to_range(), &self.edits)
    }

    fn overlaps(&self, other: &StructuralHunk) -> bool {
        let (a, b) = (self.anchor_span, other.anchor_span);
        if a.is_empty() || b.is_empty() {
            return a == b;
        }
        a.overlaps(b)
    }
}

/// Builds the block tree used at `granularity`.
pub fn build_tree(source: &LineSequence, profile: &LanguageProfile, granularity: Granularity) -> Result<BlockTree> {
    build_block_tree(source, &granularity.profile(profile))
}

/// Attaches zero-context numbered hunks to their smallest covering node
/// runs. Hunks without line numbers cannot be placed and are rejected.
pub fn map_hunks(tree: &BlockTree, hunks: &[NumberedHunk]) -> Result<Vec<StructuralHunk>> {
    hunks
        .iter()
        .map(|h| {
            let edit = Edit::from_hunk(h).ok_or_else(|| EditError::malformed("hunk without line numbers"))?;
            if edit.old.end > tree.source().len() {
                return Err(EditError::malformed("hunk exceeds the source"));
            }
            let nodes = if edit.old.is_empty() {
                vec![tree.insertion_node(edit.old.start)]
            } else {
                tree.covering_contiguous_set(Span::from_range(edit.old.clone()))
            };
            Ok(StructuralHunk::new(tree, nodes, vec![edit]))
        })
        .collect()
}

/// Widens the hunk by one step: an adjacent line-contiguous sibling
/// (alternating sides, preceding first), else the parent. Returns false at
/// the root.
fn expand_step(tree: &BlockTree, hunk: &mut StructuralHunk) -> bool {
    let first = hunk.nodes[0];
    let last = *hunk.nodes.last().expect("non-empty run");
    let Some(parent) = tree.parent(first) else {
        return false;
    };
    let siblings = &tree.node(parent).children;
    let i = siblings.iter().position(|&c| c == first).expect("child of parent");
    let j = siblings.iter().position(|&c| c == last).expect("child of parent");
    let span = |id: NodeId| tree.node(id).span;
    let prev = (i > 0 && span(siblings[i - 1]).end + 1 == span(first).start).then(|| siblings[i - 1]);
    let next = (j + 1 < siblings.len() && span(last).end + 1 == span(siblings[j + 1]).start).then(|| siblings[j + 1]);
    let mut nodes = hunk.nodes.clone();
    match (prev, next) {
        (Some(p), n) if hunk.prefer_preceding || n.is_none() => {
            nodes.insert(0, p);
            hunk.prefer_preceding = false;
        }
        (_, Some(n)) => {
            nodes.push(n);
            hunk.prefer_preceding = true;
        }
        _ => {
            nodes = vec![parent];
            hunk.prefer_preceding = true;
        }
    }
    hunk.set_nodes(tree, nodes);
    true
}

fn grow_until_unique(tree: &BlockTree, index: &AnchorIndex, hunk: &mut StructuralHunk) -> bool {
    let mut grew = false;
    while !index.unique(hunk.anchor_span.to_range()) && expand_step(tree, hunk) {
        grew = true;
    }
    grew
}

/// Expands a hunk over whole nodes until its anchor occurs exactly once in
/// the source.
pub fn expand_anchor_to_unique(tree: &BlockTree, mut hunk: StructuralHunk) -> StructuralHunk {
    let index = AnchorIndex::new(tree.source());
    grow_until_unique(tree, &index, &mut hunk);
    hunk
}

fn merge_two(tree: &BlockTree, a: StructuralHunk, b: StructuralHunk) -> StructuralHunk {
    let span = Span::new(a.anchor_span.start.min(b.anchor_span.start), a.anchor_span.end.max(b.anchor_span.end));
    let nodes = tree.nodes_for_span(span).unwrap_or_else(|| vec![tree.root()]);
    let mut edits = a.edits;
    edits.extend(b.edits);
    StructuralHunk::new(tree, nodes, edits)
}

/// Merges overlapping hunks. Returns whether anything merged.
fn merge_overlapping(tree: &BlockTree, hunks: &mut Vec<StructuralHunk>) -> bool {
    hunks.sort_by_key(|h| (h.anchor_span.start, h.anchor_span.end));
    let mut merged_any = false;
    let mut out: Vec<StructuralHunk> = Vec::with_capacity(hunks.len());
    for h in hunks.drain(..) {
        match out.last() {
            Some(last) if last.overlaps(&h) => {
                let last = out.pop().expect("checked");
                out.push(merge_two(tree, last, h));
                merged_any = true;
            }
            _ => out.push(h),
        }
    }
    // A merge can widen a hunk over an earlier one.
    if merged_any {
        merge_overlapping(tree, &mut out);
    }
    *hunks = out;
    merged_any
}

/// Replaces all hunks inside the deepest fine-grained node holding two or
/// more of them by one hunk on that node. Returns whether it did so.
fn consolidate_step(tree: &BlockTree, hunks: &mut Vec<StructuralHunk>) -> bool {
    let mut counts: std::collections::HashMap<NodeId, usize> = std::collections::HashMap::new();
    for h in hunks.iter() {
        for a in tree.ancestors(h.nodes[0]) {
            if tree.node(a).class.is_fine() {
                *counts.entry(a).or_default() += 1;
            }
        }
    }
    let best = counts
        .into_iter()
        .filter(|&(_, c)| c >= 2)
        .map(|(id, _)| id)
        .max_by_key(|&id| (tree.node(id).depth, std::cmp::Reverse(tree.node(id).span.start)));
    let Some(target) = best else {
        return false;
    };
    let span = tree.node(target).span;
    let (inside, mut rest): (Vec<_>, Vec<_>) = hunks.drain(..).partition(|h| span.contains(h.anchor_span));
    let edits = inside.into_iter().flat_map(|h| h.edits).collect();
    rest.push(StructuralHunk::new(tree, vec![target], edits));
    rest.sort_by_key(|h| (h.anchor_span.start, h.anchor_span.end));
    *hunks = rest;
    true
}

/// Merges overlapping hunks and consolidates hunks sharing a fine-grained
/// ancestor until neither applies.
pub fn consolidate_shared_parent(tree: &BlockTree, mut hunks: Vec<StructuralHunk>) -> Vec<StructuralHunk> {
    loop {
        let merged = merge_overlapping(tree, &mut hunks);
        let consolidated = consolidate_step(tree, &mut hunks);
        if !merged && !consolidated {
            return hunks;
        }
    }
}

/// Runs the full structure-aware pipeline on an already built tree.
pub fn structure_diff_on_tree(tree: &BlockTree, target: &LineSequence) -> Result<Vec<ContentHunk>> {
    let source = tree.source();
    let script = compute_line_diff(source, target);
    if script.is_identity() {
        return Err(EditError::NoChange);
    }
    let mut hunks = map_hunks(tree, &group_hunks(&script, 0))?;
    let mut index = AnchorIndex::new(source);
    loop {
        let mut changed = false;
        for h in &mut hunks {
            changed |= grow_until_unique(tree, &index, h);
        }
        changed |= merge_overlapping(tree, &mut hunks);
        changed |= consolidate_step(tree, &mut hunks);
        if changed {
            continue;
        }
        let planned: Vec<_> = hunks
            .iter()
            .map(|h| (h.anchor_span.to_range(), h.replacement.clone(), h.replacement_missing_newline))
            .collect();
        match index.first_conflict(&planned) {
            Some(i) if expand_step(tree, &mut hunks[i]) => {}
            _ => break,
        }
    }
    Ok(hunks.iter().map(|h| h.to_content(tree)).collect())
}

/// Generates a structure-aware diff from `source` to `target`.
pub fn generate_structure_diff(
    source: &LineSequence,
    target: &LineSequence,
    profile: &LanguageProfile,
    granularity: Granularity,
) -> Result<Vec<ContentHunk>> {
    if source == target {
        return Err(EditError::NoChange);
    }
    let tree = build_tree(source, profile, granularity)?;
    structure_diff_on_tree(&tree, target)
}
