//! Dataset preparation and efficiency evaluation over line-delimited JSON.

use std::io::{self, BufRead, Write};
use std::process::{Command, Stdio};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::blocktree::has_syntax_error;
use crate::contentdiff::SEARCH_OPEN;
use crate::fence::DIFF_TAG;
use crate::format::{EditFormat, FormatOptions};
use crate::select::{
    build_training_record, diff_representation, realize_output, select_format, EditRepresentation, EditSample,
    RepresentationKind,
};
use crate::text::LineSequence;
use crate::tokens::TokenCounter;

/// Records processed per parallel batch when streaming.
const BATCH: usize = 512;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrepOptions {
    /// Diff format, or full code to always emit the target.
    pub format: EditFormat,
    /// Choose per sample between full code and `format`.
    pub adaptive: bool,
    pub format_options: FormatOptions,
    /// Shell command that reads code on stdin and prints it normalized.
    pub formatter: Option<String>,
}

impl Default for PrepOptions {
    fn default() -> Self {
        PrepOptions { format: EditFormat::BlockDiff, adaptive: false, format_options: FormatOptions::default(), formatter: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub sample_id: String,
    pub prompt: String,
    pub response: String,
    pub format: EditFormat,
    pub tokens_full: usize,
    pub tokens_diff: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub kept: usize,
    pub dropped_syntax: usize,
    pub dropped_nochange: usize,
    pub dropped_malformed: usize,
}

impl FilterReport {
    pub fn total(&self) -> usize {
        self.kept + self.dropped_syntax + self.dropped_nochange + self.dropped_malformed
    }

    fn record(&mut self, outcome: &std::result::Result<DatasetRecord, DropReason>) {
        match outcome {
            Ok(_) => self.kept += 1,
            Err(DropReason::Syntax) => self.dropped_syntax += 1,
            Err(DropReason::NoChange) => self.dropped_nochange += 1,
            Err(DropReason::Malformed) => self.dropped_malformed += 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DropReason {
    Syntax,
    NoChange,
    Malformed,
}

#[derive(Debug, Deserialize)]
struct RawSample {
    instruction: String,
    input: String,
    output: String,
    #[serde(default)]
    id: Option<Value>,
}

fn id_string(id: Option<Value>, index: usize) -> String {
    match id {
        Some(Value::String(s)) => s,
        Some(Value::Null) | None => index.to_string(),
        Some(other) => other.to_string(),
    }
}

/// Pipes `code` through `sh -c command`, returning stdout on success.
pub fn run_formatter(command: &str, code: &str) -> Option<String> {
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(command)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .ok()?;
    let mut stdin = child.stdin.take()?;
    let input = code.to_owned();
    let writer = std::thread::spawn(move || stdin.write_all(input.as_bytes()));
    let output = child.wait_with_output().ok()?;
    writer.join().ok()?.ok()?;
    if !output.status.success() {
        return None;
    }
    String::from_utf8(output.stdout).ok()
}

/// Filters and transforms one sample.
pub fn prepare_sample(
    sample_id: &str,
    sample: &EditSample,
    opts: &PrepOptions,
    counter: &dyn TokenCounter,
) -> std::result::Result<DatasetRecord, DropReason> {
    let mut sample = sample.clone();
    if let Some(cmd) = &opts.formatter {
        sample.source = run_formatter(cmd, &sample.source).ok_or(DropReason::Malformed)?;
        sample.target = run_formatter(cmd, &sample.target).ok_or(DropReason::Malformed)?;
    }
    let language = opts.format_options.language;
    if has_syntax_error(&sample.target, language).map_err(|_| DropReason::Malformed)? {
        return Err(DropReason::Syntax);
    }
    if sample.source == sample.target {
        return Err(DropReason::NoChange);
    }
    let (representation, tokens_full, tokens_diff) = if opts.adaptive {
        let s = select_format(&sample, opts.format, counter, &opts.format_options).map_err(|_| DropReason::Malformed)?;
        (s.representation, s.tokens_full, s.tokens_diff)
    } else {
        let full = EditRepresentation::full(&sample.target);
        let tokens_full = counter.count(&full.payload);
        if opts.format.is_diff() {
            let diff = diff_representation(&sample, opts.format, &opts.format_options).map_err(|_| DropReason::Malformed)?;
            let n = counter.count(&diff.payload);
            (diff, tokens_full, Some(n))
        } else {
            (full, tokens_full, None)
        }
    };
    let record = build_training_record(&sample, &representation, opts.adaptive, language);
    Ok(DatasetRecord {
        sample_id: sample_id.to_owned(),
        prompt: record.prompt,
        response: record.response,
        format: representation.format,
        tokens_full,
        tokens_diff,
    })
}

/// Prepares samples in parallel; output order follows input order.
pub fn prepare_dataset(
    samples: &[(String, EditSample)],
    opts: &PrepOptions,
    counter: &dyn TokenCounter,
) -> (Vec<DatasetRecord>, FilterReport) {
    let outcomes: Vec<_> = samples.par_iter().map(|(id, s)| prepare_sample(id, s, opts, counter)).collect();
    let mut report = FilterReport::default();
    let mut records = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        report.record(&o);
        if let Ok(r) = o {
            records.push(r);
        }
    }
    (records, report)
}

fn prepare_line(index: usize, line: &str, opts: &PrepOptions, counter: &dyn TokenCounter) -> std::result::Result<DatasetRecord, DropReason> {
    let raw: RawSample = serde_json::from_str(line).map_err(|_| DropReason::Malformed)?;
    let id = id_string(raw.id, index);
    prepare_sample(&id, &EditSample::new(raw.instruction, raw.input, raw.output), opts, counter)
}

/// Streams `instruction`/`input`/`output` records from `reader` to dataset
/// records on `writer`. Blank lines are skipped; unparsable lines count as
/// malformed.
pub fn prepare_jsonl<R: BufRead, W: Write>(
    reader: R,
    mut writer: W,
    opts: &PrepOptions,
    counter: &dyn TokenCounter,
) -> io::Result<FilterReport> {
    let mut report = FilterReport::default();
    let mut batch: Vec<(usize, String)> = Vec::with_capacity(BATCH);
    let mut index = 0;
    let mut lines = reader.lines();
    loop {
        batch.clear();
        for line in lines.by_ref() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            batch.push((index, line));
            index += 1;
            if batch.len() == BATCH {
                break;
            }
        }
        if batch.is_empty() {
            break;
        }
        let outcomes: Vec<_> = batch.par_iter().map(|(i, l)| prepare_line(*i, l, opts, counter)).collect();
        for o in outcomes {
            report.record(&o);
            if let Ok(record) = o {
                serde_json::to_writer(&mut writer, &record)?;
                writer.write_all(b"\n")?;
            }
        }
    }
    writer.flush()?;
    Ok(report)
}

/// Tokens a reader must wait for before anything can be rendered: the
/// whole reply for full code and single-hunk diffs, otherwise the text up
/// to the start of the second hunk header (including the newline before
/// it). Replies without a fence count in full.
pub fn first_renderable_tokens(output: &str, counter: &dyn TokenCounter) -> usize {
    let mut offset = 0;
    let mut in_diff = false;
    let mut headers = 0;
    for line in output.split_inclusive('\n') {
        let bare = line.trim_end_matches(['\n', '\r']);
        if !in_diff {
            if let Some(tag) = bare.trim_start().strip_prefix("```") {
                if tag.trim() != DIFF_TAG {
                    break;
                }
                in_diff = true;
            }
        } else if bare.trim() == "```" {
            break;
        } else if bare.starts_with("@@") || bare.trim_end() == SEARCH_OPEN {
            headers += 1;
            if headers == 2 {
                return counter.count(&output[..offset]);
            }
        }
        offset += line.len();
    }
    counter.count(output)
}

/// One model reply to evaluate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCase {
    pub sample_id: String,
    pub source: String,
    /// Expected result, when known.
    pub target: Option<String>,
    pub completion: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub sample_id: String,
    pub kind: Option<RepresentationKind>,
    pub latency_tokens: usize,
    pub cost_tokens: usize,
    pub patch_success: bool,
    /// Patched result equals the expected target (when one was given).
    pub exact_match: Option<bool>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub samples: usize,
    pub latency_tokens: f64,
    pub cost_tokens: f64,
    pub patch_success_rate: f64,
    pub rows: Vec<EvalRow>,
}

pub fn evaluate_case(case: &EvalCase, diff_format: EditFormat, counter: &dyn TokenCounter, opts: &FormatOptions) -> EvalRow {
    let source = LineSequence::from_text(&case.source);
    let realized = realize_output(&case.completion, &source, diff_format, opts);
    let (kind, patch_success, exact_match, failure) = match realized {
        Ok(r) => {
            let exact = case.target.as_ref().map(|t| r.patched == LineSequence::from_text(t));
            (Some(r.kind), true, exact, None)
        }
        Err(e) => (None, false, case.target.as_ref().map(|_| false), Some(e.reason().to_owned())),
    };
    EvalRow {
        sample_id: case.sample_id.clone(),
        kind,
        latency_tokens: first_renderable_tokens(&case.completion, counter),
        cost_tokens: counter.count(&case.completion),
        patch_success,
        exact_match,
        failure,
    }
}

/// Parses, applies and measures every reply.
pub fn evaluate_usability(
    cases: &[EvalCase],
    diff_format: EditFormat,
    counter: &dyn TokenCounter,
    opts: &FormatOptions,
) -> EfficiencyReport {
    let rows: Vec<EvalRow> = cases.par_iter().map(|c| evaluate_case(c, diff_format, counter, opts)).collect();
    let n = rows.len();
    let mean = |f: &dyn Fn(&EvalRow) -> f64| if n == 0 { 0.0 } else { rows.iter().map(f).sum::<f64>() / n as f64 };
    EfficiencyReport {
        samples: n,
        latency_tokens: mean(&|r| r.latency_tokens as f64),
        cost_tokens: mean(&|r| r.cost_tokens as f64),
        patch_success_rate: mean(&|r| if r.patch_success { 1.0 } else { 0.0 }),
        rows,
    }
}

#[derive(Debug, Deserialize)]
struct RawEval {
    input: String,
    completion: String,
    #[serde(default)]
    output: Option<String>,
    #[serde(default)]
    id: Option<Value>,
}

/// Reads `input`/`completion` (optional `output`, `id`) records and
/// evaluates them. Unparsable lines are reported as failed rows.
pub fn evaluate_jsonl<R: BufRead>(
    reader: R,
    diff_format: EditFormat,
    counter: &dyn TokenCounter,
    opts: &FormatOptions,
) -> io::Result<EfficiencyReport> {
    let mut cases = Vec::new();
    let mut broken = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<RawEval>(&line) {
            Ok(raw) => cases.push(EvalCase {
                sample_id: id_string(raw.id, index),
                source: raw.input,
                target: raw.output,
                completion: raw.completion,
            }),
            Err(_) => broken.push(index),
        }
    }
    let mut report = evaluate_usability(&cases, diff_format, counter, opts);
    if !broken.is_empty() {
        for index in broken {
            report.rows.push(EvalRow {
                sample_id: index.to_string(),
                kind: None,
                latency_tokens: 0,
                cost_tokens: 0,
                patch_success: false,
                exact_match: None,
                failure: Some("MalformedRecord".into()),
            });
        }
        let n = report.rows.len() as f64;
        let ok = report.rows.iter().filter(|r| r.patch_success).count() as f64;
        report.samples = report.rows.len();
        report.latency_tokens = report.rows.iter().map(|r| r.latency_tokens as f64).sum::<f64>() / n;
        report.cost_tokens = report.rows.iter().map(|r| r.cost_tokens as f64).sum::<f64>() / n;
        report.patch_success_rate = ok / n;
    }
    Ok(report)
}
