//! The edit formats and a single entry point to generate and apply each.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::blocktree::{Language, LanguageProfile};
use crate::contentdiff::{generate_content_diff, parse_content_diff, render_hunks, HunkStyle};
use crate::error::{EditError, Result};
use crate::linediff::{apply_numbered, compute_line_diff, group_hunks, parse_unified, render_unified};
use crate::patch::{apply_content_diff, Patched, Rung};
use crate::structdiff::{generate_structure_diff, Granularity};
use crate::text::LineSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditFormat {
    /// The complete target file.
    FullCode,
    /// Line-numbered unified diff, zero context.
    MinUniDiff,
    /// Line-numbered unified diff, three lines of context.
    UniDiff,
    /// Content-addressed, minimal unique context.
    MinContentDiff,
    /// Content-addressed, at least three lines of context.
    ContentDiff,
    /// Structure-aware over control, function and class blocks.
    BlockDiff,
    /// Structure-aware over function and class blocks.
    FuncDiff,
}

impl EditFormat {
    pub const ALL: [EditFormat; 7] = [
        EditFormat::FullCode,
        EditFormat::MinUniDiff,
        EditFormat::UniDiff,
        EditFormat::MinContentDiff,
        EditFormat::ContentDiff,
        EditFormat::BlockDiff,
        EditFormat::FuncDiff,
    ];

    pub const DIFFS: [EditFormat; 6] = [
        EditFormat::MinUniDiff,
        EditFormat::UniDiff,
        EditFormat::MinContentDiff,
        EditFormat::ContentDiff,
        EditFormat::BlockDiff,
        EditFormat::FuncDiff,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EditFormat::FullCode => "fullcode",
            EditFormat::MinUniDiff => "minunidiff",
            EditFormat::UniDiff => "unidiff",
            EditFormat::MinContentDiff => "mincontentdiff",
            EditFormat::ContentDiff => "contentdiff",
            EditFormat::BlockDiff => "blockdiff",
            EditFormat::FuncDiff => "funcdiff",
        }
    }

    pub fn is_diff(self) -> bool {
        self != EditFormat::FullCode
    }

    /// Hunks located by line numbers rather than by content.
    pub fn is_numbered(self) -> bool {
        matches!(self, EditFormat::MinUniDiff | EditFormat::UniDiff)
    }

    fn default_context(self) -> usize {
        match self {
            EditFormat::UniDiff | EditFormat::ContentDiff => 3,
            _ => 0,
        }
    }
}

impl fmt::Display for EditFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EditFormat {
    type Err = EditError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace(['-', '_'], "");
        EditFormat::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .or(match key.as_str() {
                "full" | "code" => Some(EditFormat::FullCode),
                _ => None,
            })
            .ok_or_else(|| EditError::UnknownFormat(s.to_owned()))
    }
}

/// Knobs shared by all formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormatOptions {
    pub language: Language,
    /// Body style of content-addressed and structural hunks.
    pub style: HunkStyle,
    /// Overrides the format's context lines (unified and content diffs).
    pub context: Option<usize>,
    /// Emit `@@ -a,b +c,d @@` headers on unified diffs; without them hunks
    /// can only be parsed back, not applied.
    pub line_headers: bool,
}

impl Default for FormatOptions {
    fn default() -> Self {
        FormatOptions { language: Language::Python, style: HunkStyle::Rewrite, context: None, line_headers: true }
    }
}

impl FormatOptions {
    pub fn for_language(language: Language) -> Self {
        FormatOptions { language, ..Self::default() }
    }
}

/// Renders the edit from `source` to `target` in `format` (without a code
/// fence). Full code returns the target text.
pub fn generate_edit(format: EditFormat, source: &LineSequence, target: &LineSequence, opts: &FormatOptions) -> Result<String> {
    if format == EditFormat::FullCode {
        return Ok(target.to_text());
    }
    if source == target {
        return Err(EditError::NoChange);
    }
    let context = opts.context.unwrap_or(format.default_context());
    let hunks = match format {
        EditFormat::MinUniDiff | EditFormat::UniDiff => {
            let hunks = group_hunks(&compute_line_diff(source, target), context);
            return Ok(render_unified(&hunks, opts.line_headers));
        }
        EditFormat::MinContentDiff | EditFormat::ContentDiff => generate_content_diff(source, target, context)?,
        EditFormat::BlockDiff | EditFormat::FuncDiff => {
            let granularity = if format == EditFormat::BlockDiff { Granularity::Fine } else { Granularity::FunctionLevel };
            generate_structure_diff(source, target, &LanguageProfile::for_language(opts.language), granularity)?
        }
        EditFormat::FullCode => unreachable!(),
    };
    render_hunks(&hunks, opts.style)
}

/// Applies `edit` (fenced or bare) in `format` to `source`.
pub fn apply_edit(format: EditFormat, source: &LineSequence, edit: &str, opts: &FormatOptions) -> Result<Patched> {
    match format {
        EditFormat::FullCode => {
            let text = crate::fence::unfence(edit).map(|(_, body)| body).unwrap_or_else(|| edit.to_owned());
            Ok(Patched { text: LineSequence::from_text(&text), tolerance_used: Vec::new() })
        }
        EditFormat::MinUniDiff | EditFormat::UniDiff => apply_numbered(source, &parse_unified(edit)?),
        _ => apply_content_diff(source, &parse_content_diff(edit, opts.style)?),
    }
}

/// Highest tolerance rung a patch needed, if any hunk was located.
pub fn max_rung(patched: &Patched) -> Option<Rung> {
    patched.tolerance_used.iter().copied().max()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for f in EditFormat::ALL {
            assert_eq!(f.name().parse::<EditFormat>().unwrap(), f);
        }
        assert!("nope".parse::<EditFormat>().is_err());
    }

    #[test]
    fn every_format_reconstructs() {
        let src = LineSequence::from_text("def f():\n    return 1\n\n\ndef g():\n    return 2\n");
        let tgt = LineSequence::from_text("def f():\n    return 1\n\n\ndef g():\n    return 3");
        for style in HunkStyle::ALL {
            let opts = FormatOptions { style, ..FormatOptions::default() };
            for f in EditFormat::ALL {
                let edit = generate_edit(f, &src, &tgt, &opts).unwrap();
                assert_eq!(apply_edit(f, &src, &edit, &opts).unwrap().text, tgt, "{f} {style}");
            }
        }
    }
}
