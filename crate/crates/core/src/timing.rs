//! Wall-clock cost of generating and applying one edit.

use std::time::Instant;

use serde::Serialize;

use crate::blocktree::{Language, LanguageProfile};
use crate::error::{EditError, Result};
use crate::format::{apply_edit, generate_edit, EditFormat, FormatOptions};
use crate::structdiff::{build_tree, Granularity};
use crate::synth::Generator;
use crate::text::LineSequence;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingReport {
    pub format: EditFormat,
    pub lines: usize,
    /// Lines of the rendered edit.
    pub edit_lines: usize,
    /// Block tree construction alone (structural formats only).
    pub blocktree_seconds: f64,
    /// Full diff generation, tree construction included.
    pub diff_seconds: f64,
    pub patch_seconds: f64,
    pub round_trip: bool,
}

/// Seeded scattered edits: `rounds` passes of one to three mutations each.
pub fn scatter_edits(source: &str, language: Language, seed: u64, rounds: usize) -> String {
    let mut g = Generator::new(seed, language);
    (0..rounds).fold(source.to_owned(), |text, _| g.mutate(&text))
}

/// Times generating `format` from `source` to `target` and patching it back.
pub fn time_edit(source: &str, target: &str, format: EditFormat, opts: &FormatOptions) -> Result<TimingReport> {
    let (src, tgt) = (LineSequence::from_text(source), LineSequence::from_text(target));
    let mut report = TimingReport {
        format,
        lines: src.len(),
        edit_lines: 0,
        blocktree_seconds: 0.0,
        diff_seconds: 0.0,
        patch_seconds: 0.0,
        round_trip: true,
    };
    if src == tgt {
        return Ok(report);
    }
    let granularity = match format {
        EditFormat::BlockDiff => Some(Granularity::Fine),
        EditFormat::FuncDiff => Some(Granularity::FunctionLevel),
        _ => None,
    };
    if let Some(g) = granularity {
        let t = Instant::now();
        build_tree(&src, &LanguageProfile::for_language(opts.language), g)?;
        report.blocktree_seconds = t.elapsed().as_secs_f64();
    }
    let t = Instant::now();
    let edit = generate_edit(format, &src, &tgt, opts)?;
    report.diff_seconds = t.elapsed().as_secs_f64();
    report.edit_lines = edit.lines().count();
    let t = Instant::now();
    let patched = apply_edit(format, &src, &edit, opts);
    report.patch_seconds = t.elapsed().as_secs_f64();
    report.round_trip = match patched {
        Ok(p) => p.text == tgt,
        Err(EditError::NoChange) => false,
        Err(e) => return Err(e),
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_all_zero() {
        let r = time_edit("", "", EditFormat::BlockDiff, &FormatOptions::default()).unwrap();
        assert_eq!((r.diff_seconds, r.patch_seconds, r.blocktree_seconds), (0.0, 0.0, 0.0));
    }

    #[test]
    fn seeded_edits_repeat() {
        let src = "def f(x):\n    return x\n\n\ndef g():\n    return 1\n";
        let a = scatter_edits(src, Language::Python, 3, 4);
        assert_eq!(a, scatter_edits(src, Language::Python, 3, 4));
        let r = time_edit(src, &a, EditFormat::BlockDiff, &FormatOptions::default()).unwrap();
        assert!(r.round_trip);
    }
}
