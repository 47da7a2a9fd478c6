//! Code edit representations for LLM code editing: line-numbered unified
//! diffs, content-addressed diffs, structure-aware block and function diffs,
//! and per-sample selection between full code and a diff.

mod anchor;
pub mod blocktree;
pub mod contentdiff;
pub mod error;
pub mod fence;
pub mod format;
pub mod linediff;
pub mod patch;
pub mod pipeline;
pub mod select;
pub mod structdiff;
pub mod synth;
pub mod text;
pub mod timing;
pub mod tokens;

pub use blocktree::{build_block_tree, BlockNode, BlockTree, Language, LanguageProfile, NodeClass, NodeId, Position};
pub use contentdiff::{generate_content_diff, parse_content_diff, render_hunks, ContentHunk, HunkStyle};
pub use error::{EditError, Result};
pub use linediff::{apply_numbered, compute_line_diff, group_hunks, parse_unified, render_unified, LineDiffScript, NumberedHunk};
pub use patch::{apply_content_diff, locate_anchor, PatchOutcome, Patched, Rung};
pub use text::{LineSequence, Span, NO_NEWLINE_MARKER};
pub use format::{apply_edit, generate_edit, EditFormat, FormatOptions};
pub use structdiff::{consolidate_shared_parent, expand_anchor_to_unique, generate_structure_diff, map_hunks, Granularity, StructuralHunk};
pub use tokens::{counter_from_spec, BpeCounter, CharCounter, TokenCounter, WhitespaceCounter};
pub use pipeline::{evaluate_usability, first_renderable_tokens, prepare_dataset, DatasetRecord, EfficiencyReport, FilterReport, PrepOptions};
pub use select::{build_training_record, classify_selection, count_tokens, select_format, EditRepresentation, EditSample, RepresentationKind, SelectionCategory};
pub use timing::{scatter_edits, time_edit, TimingReport};
