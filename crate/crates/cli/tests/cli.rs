use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use adaedit_core::fence::fence;
use adaedit_core::synth::corpus;
use adaedit_core::{generate_edit, EditFormat, FormatOptions, HunkStyle, Language, LineSequence};
use serde_json::Value;
use tempfile::TempDir;

const OLD: &str = "import os\n\ndef f(x):\n    if x:\n        return 1\n    return 2\n";

fn adaedit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adaedit")).args(args).env_remove("ADAEDIT_TOKENIZER").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn error_reason(o: &Output) -> String {
    let v: Value = serde_json::from_slice(&o.stderr).unwrap_or_else(|_| panic!("stderr is not JSON: {:?}", String::from_utf8_lossy(&o.stderr)));
    v["reason"].as_str().unwrap().to_owned()
}

struct Dir(TempDir);

impl Dir {
    fn new() -> Self {
        Dir(tempfile::tempdir().unwrap())
    }

    fn file(&self, name: &str, text: &str) -> String {
        let p: PathBuf = self.0.path().join(name);
        fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_owned()
    }

    fn path(&self, name: &str) -> String {
        self.0.path().join(name).to_str().unwrap().to_owned()
    }
}

#[test]
fn diff_matches_the_library() {
    let d = Dir::new();
    let new = OLD.replace("return 1", "return 10");
    let (a, b) = (d.file("a.py", OLD), d.file("b.py", &new));
    let o = adaedit(&["diff", &a, &b, "--format", "blockdiff"]);
    assert!(o.status.success());
    let lib = generate_edit(
        EditFormat::BlockDiff,
        &LineSequence::from_text(OLD),
        &LineSequence::from_text(&new),
        &FormatOptions::default(),
    )
    .unwrap();
    assert_eq!(lib, "@@ .. @@\n-    if x:\n-        return 1\n+    if x:\n+        return 10\n");
    assert_eq!(stdout(&o), format!("{}\n", fence("diff", lib.trim_end_matches('\n'))));
    let raw = adaedit(&["diff", &a, &b, "--format", "blockdiff", "--raw"]);
    assert_eq!(stdout(&raw), lib);
}

#[test]
fn identical_files_are_no_change() {
    let d = Dir::new();
    let a = d.file("a.py", OLD);
    let o = adaedit(&["diff", &a, &a, "--format", "funcdiff"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_reason(&o), "NoChange");
}

#[test]
fn ambiguous_anchor_fails_patch() {
    let d = Dir::new();
    let a = d.file("a.py", "x = 1\ny = 2\nx = 1\n");
    let p = d.file("d.patch", "@@ .. @@\n-x = 1\n+x = 3\n");
    let o = adaedit(&["patch", &a, "--diff", &p, "--format", "contentdiff"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_reason(&o), "AmbiguousMatch");
    assert!(o.stdout.is_empty());
}

#[test]
fn usage_errors_exit_two() {
    let d = Dir::new();
    let a = d.file("a.py", OLD);
    let o = adaedit(&["diff", &a, &a, "--format", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_reason(&o), "Usage");
    let o = adaedit(&["tree", &d.path("missing.py")]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_reason(&o), "Io");
    let o = adaedit(&["select", &a, &a, "--tokenizer", "bpe:/no/such/vocab.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_reason(&o), "CounterUnavailable");
}

#[test]
fn diff_then_patch_round_trips() {
    let d = Dir::new();
    let mut pairs = corpus(5, 6, Language::Python, 5, 80);
    pairs.extend(corpus(6, 4, Language::JavaScript, 5, 80));
    for (i, p) in pairs.iter().enumerate() {
        let ext = if p.language == Language::Python { "py" } else { "js" };
        let a = d.file(&format!("a{i}.{ext}"), &p.source);
        let b = d.file(&format!("b{i}.{ext}"), &p.target);
        for format in EditFormat::ALL {
            for style in HunkStyle::ALL {
                let (f, s) = (format.name(), style.name());
                let o = adaedit(&["diff", &a, &b, "--format", f, "--style", s]);
                if style == HunkStyle::SearchReplace && o.status.code() == Some(1) {
                    assert_eq!(error_reason(&o), "DelimiterCollision");
                    continue;
                }
                assert!(o.status.success(), "{f} {s}: {}", String::from_utf8_lossy(&o.stderr));
                let patch = d.file("edit.diff", &stdout(&o));
                let out = d.path("out");
                let o = adaedit(&["patch", &a, "--diff", &patch, "--format", f, "--style", s, "--out", &out]);
                assert!(o.status.success(), "{f} {s}: {}", String::from_utf8_lossy(&o.stderr));
                assert_eq!(fs::read_to_string(&out).unwrap(), p.target, "{f} {s} pair {i}");
            }
        }
    }
}

#[test]
fn tree_dump() {
    let d = Dir::new();
    let a = d.file("a.py", OLD);
    let o = adaedit(&["tree", &a]);
    assert_eq!(
        stdout(&o),
        "root module [1..6]\n  synthetic synthetic [1..2]\n  function function_definition [3..6]\n    control if_statement [4..5]\n"
    );
    let o = adaedit(&["tree", &a, "--granularity", "function"]);
    assert!(!stdout(&o).contains("control"));
    let js = d.file("a.js", "function f(x) {\n  if (x) {\n    return 1;\n  }\n}\n");
    assert!(stdout(&adaedit(&["tree", &js])).contains("control if_statement [2..4]"));
}

#[test]
fn select_reports_both_counts() {
    let d = Dir::new();
    let old: String = (0..30).map(|i| format!("def f{i}(x):\n    return x + {i}\n\n\n")).collect();
    let new = old.replace("x + 7\n", "x * 7\n");
    let (a, b) = (d.file("a.py", &old), d.file("b.py", &new));
    let v: Value = serde_json::from_slice(&adaedit(&["select", &a, &b]).stdout).unwrap();
    assert_eq!(v["representation"], "diff");
    assert_eq!(v["format"], "blockdiff");
    assert_eq!(v["tokenizer"], "chars");
    assert_eq!(v["tokens_full"], new.chars().count());
    assert!(v["tokens_diff"].as_u64().unwrap() < v["tokens_full"].as_u64().unwrap());
    assert!(v["response"].as_str().unwrap().starts_with("```diff\n"));

    let o = Command::new(env!("CARGO_BIN_EXE_adaedit")).args(["select", &a, &b]).env("ADAEDIT_TOKENIZER", "ws").output().unwrap();
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["tokenizer"], "ws");
    assert_eq!(v["tokens_full"], new.split_whitespace().count());
}

fn samples() -> String {
    let rec = |i: &str, s: &str, t: &str| format!("{}\n", serde_json::json!({"instruction": i, "input": s, "output": t}));
    let big: String = (0..30).map(|i| format!("def f{i}(x):\n    return x + {i}\n\n\n")).collect();
    [
        rec("small change", &big, &big.replace("x + 3\n", "x - 3\n")),
        rec("rewrite", "a = 1\n", "b = 2\n"),
        rec("nothing", "a = 1\n", "a = 1\n"),
        rec("broken", "a = 1\n", "def f(:\n"),
        "{not json\n".to_owned(),
        "\n".to_owned(),
    ]
    .concat()
}

#[test]
fn prep_writes_records_and_report() {
    let d = Dir::new();
    let input = d.file("in.jsonl", &samples());
    let (out, report) = (d.path("out.jsonl"), d.path("report.json"));
    let o = adaedit(&["prep", "--in", &input, "--out", &out, "--adaptive", "--report", &report]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r, serde_json::json!({"kept": 2, "dropped_syntax": 1, "dropped_nochange": 1, "dropped_malformed": 1}));
    let records: Vec<Value> = fs::read_to_string(&out).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 2);
    assert_eq!(records[0]["sample_id"], "0");
    assert_eq!(records[0]["format"], "blockdiff");
    assert_eq!(records[1]["format"], "fullcode");
    for key in ["prompt", "response", "tokens_full", "tokens_diff"] {
        assert!(records[0].get(key).is_some(), "{key}");
    }
    let first = fs::read(&out).unwrap();
    adaedit(&["prep", "--in", &input, "--out", &out, "--adaptive", "--report", &report]);
    assert_eq!(fs::read(&out).unwrap(), first);
}

#[test]
fn prep_reads_stdin_and_reports_on_stderr() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_adaedit"))
        .args(["prep", "--format", "mincontentdiff"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    use std::io::Write;
    child.stdin.take().unwrap().write_all(samples().as_bytes()).unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 2);
    let r: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(r["kept"], 2);
}

#[test]
fn eval_scores_replies() {
    let d = Dir::new();
    let src = "a = 1\nb = 2\nc = 3\n";
    let rows = [
        serde_json::json!({"input": src, "output": "a = 1\nb = 5\nc = 3\n", "completion": "```diff\n@@ .. @@\n-b = 2\n+b = 5\n```"}),
        serde_json::json!({"input": src, "completion": "```python\na = 0\n```"}),
        serde_json::json!({"input": src, "completion": "```diff\n@@ .. @@\n-zzz\n+b\n```"}),
    ];
    let text: String = rows.iter().map(|r| format!("{r}\n")).collect();
    let input = d.file("eval.jsonl", &text);
    let o = adaedit(&["eval", "--in", &input, "--format", "mincontentdiff", "--rows"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["samples"], 3);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows[0]["exact_match"], true);
    assert_eq!(rows[1]["kind"], "full");
    assert_eq!(rows[2]["failure"], "NoMatch");
    for r in rows {
        assert!(r["latency_tokens"].as_u64() <= r["cost_tokens"].as_u64());
    }
    let summary: Value = serde_json::from_slice(&adaedit(&["eval", "--in", &input, "--format", "mincontentdiff"]).stdout).unwrap();
    assert!(summary["rows"].as_array().unwrap().is_empty());
}

#[test]
fn bench_is_seeded() {
    let d = Dir::new();
    let a = d.file("a.py", OLD);
    let run = |args: &[&str]| -> Value { serde_json::from_slice(&adaedit(args).stdout).unwrap() };
    let (x, y) = (run(&["bench", &a, "--seed", "3"]), run(&["bench", &a, "--seed", "3"]));
    assert_eq!(x["edit_lines"], y["edit_lines"]);
    assert_eq!(x["round_trip"], true);
    for key in ["diff_seconds", "blocktree_seconds", "patch_seconds"] {
        assert!(x[key].as_f64().unwrap() >= 0.0);
    }
    let empty = d.file("e.py", "");
    assert!(adaedit(&["bench", &empty]).status.success());
    assert_eq!(adaedit(&["bench"]).status.code(), Some(2));
}

#[test]
fn help_exits_zero() {
    let o = adaedit(&["--help"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("diff"));
    assert!(Path::new(env!("CARGO_BIN_EXE_adaedit")).exists());
}
