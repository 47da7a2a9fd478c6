//! Block trees: a source file as nested line spans of classes, functions
//! and control statements, with synthetic nodes filling the gaps inside
//! module and class bodies.

mod profile;

use std::fmt::Write as _;

use serde::Serialize;
use tree_sitter::{Node, Parser};

pub use profile::{Language, LanguageProfile};

use crate::error::{EditError, Result};
use crate::text::{LineSequence, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum NodeClass {
    Control,
    Function,
    Class,
    Root,
    Synthetic,
}

impl NodeClass {
    /// Legal edit targets; class and root nodes are coarse.
    pub fn is_fine(self) -> bool {
        matches!(self, NodeClass::Control | NodeClass::Function | NodeClass::Synthetic)
    }

    pub fn name(self) -> &'static str {
        match self {
            NodeClass::Control => "control",
            NodeClass::Function => "function",
            NodeClass::Class => "class",
            NodeClass::Root => "root",
            NodeClass::Synthetic => "synthetic",
        }
    }
}

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockNode {
    pub class: NodeClass,
    /// Grammar node kind; `"synthetic"` for gap fillers.
    pub kind: String,
    pub span: Span,
    pub children: Vec<NodeId>,
    pub parent: Option<NodeId>,
    pub depth: usize,
}

/// A location in the source: either the point between lines `k` and `k+1`
/// (0-based count of lines before it) or a span of lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    Insertion(usize),
    Lines(Span),
}

#[derive(Debug, Clone)]
pub struct BlockTree {
    nodes: Vec<BlockNode>,
    source: LineSequence,
    language: Language,
}

struct Proto {
    class: NodeClass,
    kind: String,
    span: Span,
    children: Vec<Proto>,
}

fn node_span(node: Node) -> Span {
    let start = node.start_position().row + 1;
    let end_pos = node.end_position();
    let end = if end_pos.column == 0 && end_pos.row > node.start_position().row {
        end_pos.row
    } else {
        end_pos.row + 1
    };
    Span::new(start, end.max(start))
}

/// Parses `text` and reports whether the grammar flagged any error.
pub fn has_syntax_error(text: &str, language: Language) -> Result<bool> {
    Ok(parse(text, language)?.root_node().has_error())
}

fn parse(text: &str, language: Language) -> Result<tree_sitter::Tree> {
    let mut parser = Parser::new();
    parser
        .set_language(&language.grammar())
        .map_err(|e| EditError::UnsupportedLanguage(format!("{language}: {e}")))?;
    parser
        .parse(text, None)
        .ok_or_else(|| EditError::UnsupportedLanguage(format!("{language}: parser produced no tree")))
}

struct Builder<'p> {
    profile: &'p LanguageProfile,
}

impl Builder<'_> {
    fn classify<'t>(&self, node: Node<'t>, parent_kind: &str) -> Option<(NodeClass, Node<'t>)> {
        let kind = node.kind();
        if self.profile.wrapper_kinds.contains(kind) {
            let def = node.child_by_field_name("definition")?;
            let (class, _) = self.classify(def, kind)?;
            return Some((class, def));
        }
        if self.profile.function_kinds.contains(kind) {
            Some((NodeClass::Function, node))
        } else if self.profile.class_kinds.contains(kind) {
            Some((NodeClass::Class, node))
        } else if self.profile.control_kinds.contains(kind) && !self.profile.transparent_parents.contains(parent_kind) {
            Some((NodeClass::Control, node))
        } else {
            None
        }
    }

    fn collect(&self, node: Node, out: &mut Vec<Proto>) {
        let mut cursor = node.walk();
        for child in node.named_children(&mut cursor) {
            self.visit(child, node.kind(), out);
        }
    }

    fn visit(&self, node: Node, parent_kind: &str, out: &mut Vec<Proto>) {
        if node.is_error() || node.is_missing() || node.has_error() {
            self.collect(node, out);
            return;
        }
        match self.classify(node, parent_kind) {
            Some((class, def)) => {
                let mut children = Vec::new();
                self.collect(def, &mut children);
                push_merged(out, Proto { class, kind: def.kind().to_owned(), span: node_span(node), children });
            }
            None => self.collect(node, out),
        }
    }
}

/// Appends `p`, folding it into the previous sibling when the two share a
/// line so that siblings never overlap.
fn push_merged(out: &mut Vec<Proto>, p: Proto) {
    if let Some(last) = out.last_mut() {
        if p.span.start <= last.span.end {
            last.span.end = last.span.end.max(p.span.end);
            for c in p.children {
                push_merged(&mut last.children, c);
            }
            return;
        }
    }
    out.push(p);
}

/// Clamps children into `span` and, for root and class nodes, fills gaps
/// with synthetic nodes.
fn finish(class: NodeClass, span: Span, children: Vec<Proto>) -> Vec<Proto> {
    let clamped = children.into_iter().filter_map(|mut c| {
        c.span.start = c.span.start.max(span.start);
        c.span.end = c.span.end.min(span.end);
        (!c.span.is_empty()).then(|| {
            c.children = finish(c.class, c.span, std::mem::take(&mut c.children));
            c
        })
    });
    if !matches!(class, NodeClass::Root | NodeClass::Class) {
        return clamped.collect();
    }
    let mut out = Vec::new();
    let mut line = span.start;
    for c in clamped {
        if c.span.start > line {
            out.push(synthetic(Span::new(line, c.span.start - 1)));
        }
        line = c.span.end + 1;
        out.push(c);
    }
    if line <= span.end {
        out.push(synthetic(Span::new(line, span.end)));
    }
    out
}

fn synthetic(span: Span) -> Proto {
    Proto { class: NodeClass::Synthetic, kind: "synthetic".into(), span, children: Vec::new() }
}

/// Builds the block tree of `source` under `profile`.
///
/// Nodes the parser marks as erroneous never become blocks, but blocks
/// inside them are still found; lines they leave uncovered end up in
/// synthetic nodes.
pub fn build_block_tree(source: &LineSequence, profile: &LanguageProfile) -> Result<BlockTree> {
    let ts_tree = parse(&source.to_text(), profile.language)?;
    let root = ts_tree.root_node();
    let mut children = Vec::new();
    Builder { profile }.collect(root, &mut children);
    let span = Span::new(1, source.len());
    let children = finish(NodeClass::Root, span, children);
    let mut tree = BlockTree { nodes: Vec::new(), source: source.clone(), language: profile.language };
    tree.add(Proto { class: NodeClass::Root, kind: root.kind().to_owned(), span, children }, None, 0);
    Ok(tree)
}

impl BlockTree {
    fn add(&mut self, p: Proto, parent: Option<NodeId>, depth: usize) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(BlockNode { class: p.class, kind: p.kind, span: p.span, children: Vec::new(), parent, depth });
        let kids: Vec<NodeId> = p.children.into_iter().map(|c| self.add(c, Some(id), depth + 1)).collect();
        self.nodes[id].children = kids;
        id
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn node(&self, id: NodeId) -> &BlockNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[BlockNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn source(&self) -> &LineSequence {
        &self.source
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id].parent
    }

    /// Proper ancestors of `id`, nearest first.
    pub fn ancestors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(self.parent(id), move |&p| self.parent(p))
    }

    /// Union span of a contiguous node run.
    pub fn run_span(&self, run: &[NodeId]) -> Span {
        match (run.first(), run.last()) {
            (Some(&a), Some(&b)) => Span::new(self.nodes[a].span.start, self.nodes[b].span.end),
            _ => Span::new(1, 0),
        }
    }

    /// The deepest node containing `position`.
    pub fn smallest_containing(&self, position: Position) -> NodeId {
        let mut current = self.root();
        loop {
            let next = self.nodes[current].children.iter().copied().find(|&c| {
                let s = self.nodes[c].span;
                match position {
                    Position::Lines(span) => s.contains(span),
                    Position::Insertion(k) => s.start <= k && k < s.end,
                }
            });
            match next {
                Some(c) => current = c,
                None => return current,
            }
        }
    }

    /// Node owning an insertion between lines `k` and `k+1`. Coarse results
    /// are refined to the child starting right after the point, else the
    /// child ending right before it.
    pub fn insertion_node(&self, k: usize) -> NodeId {
        let mut current = self.smallest_containing(Position::Insertion(k));
        while !self.nodes[current].class.is_fine() {
            let children = &self.nodes[current].children;
            let following = children.iter().copied().find(|&c| self.nodes[c].span.start == k + 1);
            let preceding = children.iter().copied().find(|&c| self.nodes[c].span.end == k);
            match following.or(preceding) {
                Some(c) => current = c,
                None => break,
            }
        }
        current
    }

    /// Minimal nodes covering `span`: the deepest node containing it, or a
    /// contiguous run of that node's children when one covers the span.
    pub fn covering_contiguous_set(&self, span: Span) -> Vec<NodeId> {
        let node = self.smallest_containing(Position::Lines(span));
        let children = &self.nodes[node].children;
        let first = children.iter().position(|&c| self.nodes[c].span.end >= span.start);
        let last = children.iter().rposition(|&c| self.nodes[c].span.start <= span.end);
        if let (Some(i), Some(j)) = (first, last) {
            if i <= j {
                let run = &children[i..=j];
                let contiguous = run.windows(2).all(|w| self.nodes[w[0]].span.end + 1 == self.nodes[w[1]].span.start);
                if contiguous && self.run_span(run).contains(span) {
                    return run.to_vec();
                }
            }
        }
        vec![node]
    }

    /// The node run whose union is exactly `span`, if any.
    pub fn nodes_for_span(&self, span: Span) -> Option<Vec<NodeId>> {
        let node = self.smallest_containing(Position::Lines(span));
        if self.nodes[node].span == span {
            return Some(vec![node]);
        }
        let children = &self.nodes[node].children;
        let i = children.iter().position(|&c| self.nodes[c].span.start == span.start)?;
        let j = children.iter().position(|&c| self.nodes[c].span.end == span.end)?;
        (i <= j).then(|| children[i..=j].to_vec())
    }

    /// Indented text rendering, one node per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for node in &self.nodes {
            let _ = writeln!(
                out,
                "{:indent$}{} {} {}",
                "",
                node.class.name(),
                node.kind,
                node.span,
                indent = node.depth * 2
            );
        }
        out
    }
}
