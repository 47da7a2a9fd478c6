use std::fs;
use std::io::{self, Cursor, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use adaedit_core::fence::{fence, DIFF_TAG};
use adaedit_core::pipeline::{evaluate_jsonl, prepare_jsonl};
use adaedit_core::structdiff::build_tree;
use adaedit_core::synth::large_file;
use adaedit_core::{
    apply_edit, counter_from_spec, generate_edit, scatter_edits, select_format, time_edit, EditError, EditFormat,
    EditSample, FormatOptions, Granularity, HunkStyle, Language, LanguageProfile, LineSequence, PrepOptions,
    TokenCounter,
};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "adaedit", version, about = "Generate, apply and choose between code edit formats")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render the edit from OLD to NEW.
    Diff {
        old: PathBuf,
        new: PathBuf,
        #[command(flatten)]
        fmt: FormatArgs,
        /// Print the bare diff without a code fence.
        #[arg(long)]
        raw: bool,
    },
    /// Apply an edit to OLD and print the result.
    Patch {
        old: PathBuf,
        /// Edit file, `-` for stdin.
        #[arg(long)]
        diff: PathBuf,
        #[command(flatten)]
        fmt: FormatArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the block tree of FILE.
    Tree {
        file: PathBuf,
        #[arg(long = "lang")]
        language: Option<Language>,
        #[arg(long, default_value = "fine")]
        granularity: Granularity,
    },
    /// Pick the cheaper of full code and a diff for OLD -> NEW.
    Select {
        old: PathBuf,
        new: PathBuf,
        #[command(flatten)]
        fmt: FormatArgs,
        #[command(flatten)]
        tok: TokenizerArg,
    },
    /// Turn instruction/input/output records into training records.
    Prep {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        fmt: FormatArgs,
        /// Choose per sample between full code and the diff format.
        #[arg(long)]
        adaptive: bool,
        #[command(flatten)]
        tok: TokenizerArg,
        /// Shell command normalizing code read from stdin.
        #[arg(long)]
        formatter: Option<String>,
        /// Write the filter report here instead of stderr.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Score model replies: patch success and token latency/cost.
    Eval {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[command(flatten)]
        fmt: FormatArgs,
        #[command(flatten)]
        tok: TokenizerArg,
        /// Include per-sample rows.
        #[arg(long)]
        rows: bool,
    },
    /// Time diff generation and patching on seeded scattered edits.
    Bench {
        /// Source file; omit with --synth-lines.
        file: Option<PathBuf>,
        #[command(flatten)]
        fmt: FormatArgs,
        /// Benchmark a generated file of at least this many lines.
        #[arg(long, conflicts_with = "file")]
        synth_lines: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Mutation passes (one to three edits each).
        #[arg(long, default_value_t = 5)]
        rounds: usize,
    },
}

#[derive(Args)]
struct FormatArgs {
    #[arg(long, default_value = "blockdiff")]
    format: EditFormat,
    #[arg(long, default_value = "rewrite")]
    style: HunkStyle,
    /// Context lines for unidiff and contentdiff.
    #[arg(long)]
    context: Option<usize>,
    /// Defaults to the file extension, else python.
    #[arg(long = "lang")]
    language: Option<Language>,
    /// Bare `@@ .. @@` headers on unified diffs.
    #[arg(long)]
    no_line_headers: bool,
}

impl FormatArgs {
    fn options(&self, path: Option<&Path>) -> FormatOptions {
        FormatOptions {
            language: resolve_language(self.language, path),
            style: self.style,
            context: self.context,
            line_headers: !self.no_line_headers,
        }
    }
}

#[derive(Args)]
struct TokenizerArg {
    /// `chars`, `ws` or `bpe:<vocab.json>`.
    #[arg(long, env = "ADAEDIT_TOKENIZER", default_value = "chars")]
    tokenizer: String,
}

impl TokenizerArg {
    fn counter(&self) -> Result<Arc<dyn TokenCounter>, Failure> {
        counter_from_spec(&self.tokenizer).map_err(Failure::Edit)
    }
}

enum Failure {
    Usage(String),
    Io(PathBuf, io::Error),
    Edit(EditError),
}

impl Failure {
    fn report(&self) -> (u8, serde_json::Value) {
        match self {
            Failure::Usage(msg) => (2, json!({"reason": "Usage", "message": msg})),
            Failure::Io(path, e) => (2, json!({"reason": "Io", "message": format!("{}: {e}", path.display())})),
            Failure::Edit(e) => {
                let code = match e {
                    EditError::UnsupportedLanguage(_) | EditError::UnknownFormat(_) | EditError::CounterUnavailable(_) => 2,
                    _ => 1,
                };
                (code, json!({"reason": e.reason(), "message": e.to_string()}))
            }
        }
    }
}

impl From<EditError> for Failure {
    fn from(e: EditError) -> Self {
        Failure::Edit(e)
    }
}

fn resolve_language(flag: Option<Language>, path: Option<&Path>) -> Language {
    flag.or_else(|| path.and_then(Language::from_path)).unwrap_or(Language::Python)
}

fn read_bytes(path: Option<&Path>) -> Result<Vec<u8>, Failure> {
    match path {
        None => read_stdin(),
        Some(p) if p == Path::new("-") => read_stdin(),
        Some(p) => fs::read(p).map_err(|e| Failure::Io(p.to_owned(), e)),
    }
}

fn read_stdin() -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    io::stdin().read_to_end(&mut buf).map_err(|e| Failure::Io("<stdin>".into(), e))?;
    Ok(buf)
}

fn read_text(path: Option<&Path>) -> Result<String, Failure> {
    Ok(String::from_utf8_lossy(&read_bytes(path)?).into_owned())
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    let result = match path {
        Some(p) if p != Path::new("-") => fs::write(p, text),
        _ => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush())
        }
    };
    result.map_err(|e| Failure::Io(path.unwrap_or(Path::new("<stdout>")).to_owned(), e))
}

fn line(value: &serde_json::Value) -> String {
    format!("{value}\n")
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Diff { old, new, fmt, raw } => {
            let opts = fmt.options(Some(&old));
            let source = LineSequence::from_text(&read_text(Some(&old))?);
            let target = LineSequence::from_text(&read_text(Some(&new))?);
            let edit = generate_edit(fmt.format, &source, &target, &opts)?;
            let text = if raw {
                edit
            } else {
                // Same payload convention as training replies: diffs lose
                // their final newline, full code is kept verbatim.
                let mut fenced = if fmt.format.is_diff() {
                    fence(DIFF_TAG, edit.strip_suffix('\n').unwrap_or(&edit))
                } else {
                    fence(opts.language.fence_tag(), &edit)
                };
                fenced.push('\n');
                fenced
            };
            write_out(None, &text)
        }
        Command::Patch { old, diff, fmt, out } => {
            let opts = fmt.options(Some(&old));
            let source = LineSequence::from_text(&read_text(Some(&old))?);
            let edit = read_text(Some(&diff))?;
            let patched = apply_edit(fmt.format, &source, &edit, &opts)?;
            write_out(out.as_deref(), &patched.text.to_text())
        }
        Command::Tree { file, language, granularity } => {
            let language = resolve_language(language, Some(&file));
            let source = LineSequence::from_text(&read_text(Some(&file))?);
            let tree = build_tree(&source, &LanguageProfile::for_language(language), granularity)?;
            write_out(None, &tree.dump())
        }
        Command::Select { old, new, fmt, tok } => {
            let counter = tok.counter()?;
            let opts = fmt.options(Some(&old));
            let sample = EditSample::new("", read_text(Some(&old))?, read_text(Some(&new))?);
            let s = select_format(&sample, fmt.format, counter.as_ref(), &opts)?;
            let value = json!({
                "representation": s.representation.kind,
                "format": s.representation.format,
                "tokenizer": counter.name(),
                "tokens_full": s.tokens_full,
                "tokens_diff": s.tokens_diff,
                "response": s.representation.to_reply(opts.language),
            });
            write_out(None, &line(&value))
        }
        Command::Prep { input, out, fmt, adaptive, tok, formatter, report } => {
            let counter = tok.counter()?;
            if fmt.format == EditFormat::FullCode && adaptive {
                return Err(Failure::Usage("--adaptive needs a diff format".into()));
            }
            let opts = PrepOptions { format: fmt.format, adaptive, format_options: fmt.options(None), formatter };
            let data = read_bytes(input.as_deref())?;
            let reader = Cursor::new(String::from_utf8_lossy(&data).into_owned());
            let mut buffer = Vec::new();
            let filter = prepare_jsonl(reader, &mut buffer, &opts, counter.as_ref())
                .map_err(|e| Failure::Io(input.clone().unwrap_or_else(|| "<stdin>".into()), e))?;
            write_out(out.as_deref(), &String::from_utf8_lossy(&buffer))?;
            let summary = line(&serde_json::to_value(filter).expect("report serializes"));
            match report {
                Some(path) => write_out(Some(&path), &summary),
                None => {
                    eprint!("{summary}");
                    Ok(())
                }
            }
        }
        Command::Eval { input, fmt, tok, rows } => {
            let counter = tok.counter()?;
            let data = read_bytes(input.as_deref())?;
            let reader = Cursor::new(String::from_utf8_lossy(&data).into_owned());
            let mut report = evaluate_jsonl(reader, fmt.format, counter.as_ref(), &fmt.options(None))
                .map_err(|e| Failure::Io(input.clone().unwrap_or_else(|| "<stdin>".into()), e))?;
            if !rows {
                report.rows.clear();
            }
            write_out(None, &line(&serde_json::to_value(report).expect("report serializes")))
        }
        Command::Bench { file, fmt, synth_lines, seed, rounds } => {
            let opts = fmt.options(file.as_deref());
            let source = match (&file, synth_lines) {
                (Some(path), _) => read_text(Some(path))?,
                (None, Some(n)) => large_file(seed, opts.language, n),
                (None, None) => return Err(Failure::Usage("give a FILE or --synth-lines".into())),
            };
            let target = scatter_edits(&source, opts.language, seed, rounds);
            let report = time_edit(&source, &target, fmt.format, &opts)?;
            write_out(None, &line(&serde_json::to_value(report).expect("report serializes")))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{}", line(&json!({"reason": "Usage", "message": e.to_string()})));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, value) = f.report();
            eprint!("{}", line(&value));
            ExitCode::from(code)
        }
    }
}
