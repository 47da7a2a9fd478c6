//! Per-sample choice between full code and a diff, training records, and
//! classification of a model's choice against the optimum.

use serde::{Deserialize, Serialize};

use crate::blocktree::Language;
use crate::error::{EditError, Result};
use crate::fence::{fence, unfence, DIFF_TAG};
use crate::format::{apply_edit, generate_edit, EditFormat, FormatOptions};
use crate::text::LineSequence;
use crate::tokens::TokenCounter;

/// One editing task.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditSample {
    pub intent: String,
    pub source: String,
    pub target: String,
}

impl EditSample {
    pub fn new(intent: impl Into<String>, source: impl Into<String>, target: impl Into<String>) -> Self {
        EditSample { intent: intent.into(), source: source.into(), target: target.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepresentationKind {
    Full,
    Diff,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditRepresentation {
    pub kind: RepresentationKind,
    pub format: EditFormat,
    /// Full target code, or the rendered diff without its final newline.
    pub payload: String,
}

impl EditRepresentation {
    pub fn full(target: &str) -> Self {
        EditRepresentation { kind: RepresentationKind::Full, format: EditFormat::FullCode, payload: target.to_owned() }
    }

    /// Fence tag of this representation.
    pub fn tag(&self, language: Language) -> &'static str {
        match self.kind {
            RepresentationKind::Full => language.fence_tag(),
            RepresentationKind::Diff => DIFF_TAG,
        }
    }

    /// The representation as a fenced model reply.
    pub fn to_reply(&self, language: Language) -> String {
        fence(self.tag(language), &self.payload)
    }
}

/// A selection with the counts it was based on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Selection {
    pub representation: EditRepresentation,
    pub tokens_full: usize,
    /// Absent when the diff could not be generated.
    pub tokens_diff: Option<usize>,
}

pub fn count_tokens(text: &str, counter: &dyn TokenCounter) -> usize {
    counter.count(text)
}

/// Renders the diff payload of `sample` in `format`.
pub fn diff_representation(sample: &EditSample, format: EditFormat, opts: &FormatOptions) -> Result<EditRepresentation> {
    let source = LineSequence::from_text(&sample.source);
    let target = LineSequence::from_text(&sample.target);
    let mut payload = generate_edit(format, &source, &target, opts)?;
    if payload.ends_with('\n') {
        payload.pop();
    }
    Ok(EditRepresentation { kind: RepresentationKind::Diff, format, payload })
}

/// Picks whichever of the full target and its diff has fewer tokens. Ties
/// go to the diff; an empty source or a diff that cannot be rendered
/// yields full code.
pub fn select_format(
    sample: &EditSample,
    diff_format: EditFormat,
    counter: &dyn TokenCounter,
    opts: &FormatOptions,
) -> Result<Selection> {
    if sample.source == sample.target {
        return Err(EditError::NoChange);
    }
    let full = EditRepresentation::full(&sample.target);
    let tokens_full = counter.count(&full.payload);
    let diff = if diff_format.is_diff() { diff_representation(sample, diff_format, opts).ok() } else { None };
    let tokens_diff = diff.as_ref().map(|d| counter.count(&d.payload));
    let representation = match (diff, tokens_diff) {
        (Some(d), Some(n)) if n <= tokens_full && !sample.source.is_empty() => d,
        _ => full,
    };
    Ok(Selection { representation, tokens_full, tokens_diff })
}

/// Prompt and response text of one supervised example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub prompt: String,
    pub response: String,
}

/// The instruction prompt, ending exactly at `### Response\n`.
pub fn render_prompt(instruction: &str, input_code: &str, language: Language) -> String {
    format!(
        "### Instruction\n{instruction}\n\n### Input Code\n```{}\n{input_code}\n```\n\n### Response\n",
        language.fence_tag()
    )
}

/// Response prefix supplied at inference time. Adaptive models get a bare
/// fence and choose the format themselves.
pub fn generation_prefix(kind: RepresentationKind, adaptive: bool, language: Language) -> String {
    match (adaptive, kind) {
        (true, _) => "```".to_owned(),
        (false, RepresentationKind::Full) => format!("```{}\n", language.fence_tag()),
        (false, RepresentationKind::Diff) => format!("```{DIFF_TAG}\n"),
    }
}

/// Builds the training record. The response always carries the complete
/// fenced block; `adaptive` only changes what [`generation_prefix`] hands
/// the model at inference time.
pub fn build_training_record(
    sample: &EditSample,
    representation: &EditRepresentation,
    _adaptive: bool,
    language: Language,
) -> TrainingRecord {
    TrainingRecord {
        prompt: render_prompt(&sample.intent, &sample.source, language),
        response: representation.to_reply(language),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SelectionCategory {
    Correct,
    BiasLE20,
    BiasLE50,
    BiasGT50,
    NoChange,
}

impl SelectionCategory {
    pub const ALL: [SelectionCategory; 5] = [
        SelectionCategory::Correct,
        SelectionCategory::BiasLE20,
        SelectionCategory::BiasLE50,
        SelectionCategory::BiasGT50,
        SelectionCategory::NoChange,
    ];
}

/// Buckets a suboptimal choice by its relative excess over the optimum.
pub fn deviation_category(chosen: usize, optimal: usize) -> SelectionCategory {
    if chosen <= optimal {
        return SelectionCategory::Correct;
    }
    if optimal == 0 {
        return SelectionCategory::BiasGT50;
    }
    // Integer comparisons: (chosen - optimal) / optimal <= p / 10.
    let excess = (chosen - optimal) * 10;
    if excess <= 2 * optimal {
        SelectionCategory::BiasLE20
    } else if excess <= 5 * optimal {
        SelectionCategory::BiasLE50
    } else {
        SelectionCategory::BiasGT50
    }
}

/// What a model reply amounts to once parsed and applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealizedOutput {
    pub kind: RepresentationKind,
    /// Text inside the fence.
    pub payload: String,
    pub patched: LineSequence,
}

/// Parses a fenced reply and applies it to `source`. Replies tagged `diff`
/// are read in `diff_format`; any other tag is full code.
pub fn realize_output(output: &str, source: &LineSequence, diff_format: EditFormat, opts: &FormatOptions) -> Result<RealizedOutput> {
    let (tag, payload) = unfence(output).ok_or_else(|| EditError::malformed("reply has no code fence"))?;
    if tag == DIFF_TAG {
        if !diff_format.is_diff() {
            return Err(EditError::UnknownFormat(DIFF_TAG.to_owned()));
        }
        let patched = apply_edit(diff_format, source, &payload, opts)?.text;
        Ok(RealizedOutput { kind: RepresentationKind::Diff, payload, patched })
    } else {
        let patched = LineSequence::from_text(&payload);
        Ok(RealizedOutput { kind: RepresentationKind::Full, payload, patched })
    }
}

/// Compares the format a model chose against the cheaper alternative for
/// the edit it actually made.
pub fn classify_selection(
    output: &str,
    sample: &EditSample,
    diff_format: EditFormat,
    counter: &dyn TokenCounter,
    opts: &FormatOptions,
) -> SelectionCategory {
    let source = LineSequence::from_text(&sample.source);
    let Ok(realized) = realize_output(output, &source, diff_format, opts) else {
        return SelectionCategory::NoChange;
    };
    if realized.patched == source {
        return SelectionCategory::NoChange;
    }
    let chosen = counter.count(&realized.payload);
    let realized_sample = EditSample::new(sample.intent.clone(), sample.source.clone(), realized.patched.to_text());
    let alternative = match realized.kind {
        RepresentationKind::Diff => Some(counter.count(&realized_sample.target)),
        RepresentationKind::Full => {
            diff_representation(&realized_sample, diff_format, opts).ok().map(|d| counter.count(&d.payload))
        }
    };
    match alternative {
        Some(alt) if alt < chosen => deviation_category(chosen, alt),
        _ => SelectionCategory::Correct,
    }
}
