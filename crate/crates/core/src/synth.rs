//! Seeded generator of Python and JavaScript sources and edits, for tests
//! and benchmarks. Output is realistic enough to exercise every block kind,
//! decorators, comments, duplicated functions and repeated lines.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::blocktree::Language;

const NAMES: &[&str] = &["x", "y", "total", "count", "result", "value", "items", "data", "key", "acc"];
const FUNCS: &[&str] = &["load", "parse", "render", "update", "fetch", "merge", "check", "build", "scan", "apply"];
const CLASSES: &[&str] = &["Store", "Parser", "Client", "Cache", "Worker", "Report"];
const COMMENTS: &[&str] = &["TODO: tidy up", "fast path", "keep in sync with callers", "see below", "edge case"];

pub struct Generator {
    rng: ChaCha8Rng,
    language: Language,
    lines: Vec<String>,
    emitted_functions: Vec<Vec<String>>,
    serial: usize,
}

impl Generator {
    pub fn new(seed: u64, language: Language) -> Self {
        Generator { rng: ChaCha8Rng::seed_from_u64(seed), language, lines: Vec::new(), emitted_functions: Vec::new(), serial: 0 }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn name(&mut self) -> &'static str {
        NAMES.choose(&mut self.rng).copied().unwrap_or("x")
    }

    fn func_name(&mut self) -> String {
        self.serial += 1;
        let base = FUNCS.choose(&mut self.rng).copied().unwrap_or("f");
        // Small suffix range so that names repeat across a file.
        format!("{base}_{}", self.rng.gen_range(0..(4 + self.serial / 3)))
    }

    fn number(&mut self) -> i64 {
        if self.rng.gen_bool(0.5) {
            self.rng.gen_range(0..4)
        } else {
            self.rng.gen_range(0..1000)
        }
    }

    fn expr(&mut self) -> String {
        let a = self.name();
        match self.rng.gen_range(0..6) {
            0 => self.number().to_string(),
            1 => format!("{a} + {}", self.number()),
            2 => {
                let b = self.name();
                format!("{a} * {b}")
            }
            3 => match self.language {
                Language::Python => format!("len({a})"),
                Language::JavaScript => format!("{a}.length"),
            },
            4 => {
                let f = FUNCS.choose(&mut self.rng).copied().unwrap_or("f");
                format!("{f}({a})")
            }
            _ => a.to_owned(),
        }
    }

    fn cond(&mut self) -> String {
        let a = self.name();
        let n = self.number();
        match (self.language, self.rng.gen_range(0..3)) {
            (_, 0) => format!("{a} > {n}"),
            (Language::Python, 1) => format!("{a} is None"),
            (Language::JavaScript, 1) => format!("{a} === null"),
            (Language::Python, _) => format!("not {a}"),
            (Language::JavaScript, _) => format!("!{a}"),
        }
    }

    fn simple(&mut self, indent: usize) -> String {
        let pad = " ".repeat(indent);
        let a = self.name();
        let e = self.expr();
        match (self.language, self.rng.gen_range(0..5)) {
            (Language::Python, 0) => format!("{pad}print({a})"),
            (Language::JavaScript, 0) => format!("{pad}console.log({a});"),
            (Language::Python, 1) => format!("{pad}{a} += 1"),
            (Language::JavaScript, 1) => format!("{pad}{a} += 1;"),
            (Language::Python, 2) if self.rng.gen_bool(0.3) => format!("{pad}pass"),
            (Language::Python, _) => format!("{pad}{a} = {e}"),
            (Language::JavaScript, _) => format!("{pad}{a} = {e};"),
        }
    }

    fn comment(&mut self, indent: usize) -> String {
        let c = COMMENTS.choose(&mut self.rng).copied().unwrap_or("note");
        match self.language {
            Language::Python => format!("{}# {c}", " ".repeat(indent)),
            Language::JavaScript => format!("{}// {c}", " ".repeat(indent)),
        }
    }

    fn body(&mut self, indent: usize, depth: usize, out: &mut Vec<String>) {
        let n = self.rng.gen_range(1..=4);
        for _ in 0..n {
            self.statement(indent, depth, out);
        }
    }

    fn statement(&mut self, indent: usize, depth: usize, out: &mut Vec<String>) {
        let roll = self.rng.gen_range(0..10);
        if depth >= 3 || roll < 5 {
            if roll == 0 {
                out.push(self.comment(indent));
            }
            out.push(self.simple(indent));
            return;
        }
        match self.language {
            Language::Python => self.python_control(indent, depth, out),
            Language::JavaScript => self.js_control(indent, depth, out),
        }
    }

    fn python_control(&mut self, indent: usize, depth: usize, out: &mut Vec<String>) {
        let pad = " ".repeat(indent);
        let inner = indent + 4;
        match self.rng.gen_range(0..5) {
            0 => {
                out.push(format!("{pad}if {}:", self.cond()));
                self.body(inner, depth + 1, out);
                if self.rng.gen_bool(0.3) {
                    out.push(format!("{pad}elif {}:", self.cond()));
                    self.body(inner, depth + 1, out);
                }
                if self.rng.gen_bool(0.4) {
                    out.push(format!("{pad}else:"));
                    self.body(inner, depth + 1, out);
                }
            }
            1 => {
                let a = self.name();
                out.push(format!("{pad}for {a} in range({}):", self.number()));
                self.body(inner, depth + 1, out);
            }
            2 => {
                let a = self.name();
                out.push(format!("{pad}while {a} < {}:", self.number()));
                out.push(format!("{}{a} += 1", " ".repeat(inner)));
                self.body(inner, depth + 1, out);
            }
            3 => {
                out.push(format!("{pad}try:"));
                self.body(inner, depth + 1, out);
                out.push(format!("{pad}except ValueError:"));
                self.body(inner, depth + 1, out);
            }
            _ => {
                out.push(format!("{pad}with open({}) as fh:", self.name()));
                self.body(inner, depth + 1, out);
            }
        }
    }

    fn js_control(&mut self, indent: usize, depth: usize, out: &mut Vec<String>) {
        let pad = " ".repeat(indent);
        let inner = indent + 2;
        match self.rng.gen_range(0..5) {
            0 => {
                out.push(format!("{pad}if ({}) {{", self.cond()));
                self.body(inner, depth + 1, out);
                if self.rng.gen_bool(0.3) {
                    out.push(format!("{pad}}} else if ({}) {{", self.cond()));
                    self.body(inner, depth + 1, out);
                }
                if self.rng.gen_bool(0.4) {
                    out.push(format!("{pad}}} else {{"));
                    self.body(inner, depth + 1, out);
                }
                out.push(format!("{pad}}}"));
            }
            1 => {
                out.push(format!("{pad}for (let i = 0; i < {}; i++) {{", self.number()));
                self.body(inner, depth + 1, out);
                out.push(format!("{pad}}}"));
            }
            2 => {
                let a = self.name();
                out.push(format!("{pad}while ({a} < {}) {{", self.number()));
                out.push(format!("{}{a} += 1;", " ".repeat(inner)));
                self.body(inner, depth + 1, out);
                out.push(format!("{pad}}}"));
            }
            3 => {
                out.push(format!("{pad}try {{"));
                self.body(inner, depth + 1, out);
                out.push(format!("{pad}}} catch (err) {{"));
                self.body(inner, depth + 1, out);
                out.push(format!("{pad}}}"));
            }
            _ => {
                out.push(format!("{pad}switch ({}) {{", self.name()));
                for k in 0..self.rng.gen_range(1..3) {
                    out.push(format!("{}case {k}:", " ".repeat(inner)));
                    self.body(inner + 2, depth + 1, out);
                    out.push(format!("{}break;", " ".repeat(inner + 2)));
                }
                out.push(format!("{pad}}}"));
            }
        }
    }

    /// A function definition at `indent`; `method` selects class-member syntax.
    pub fn function(&mut self, indent: usize, method: bool) -> Vec<String> {
        let pad = " ".repeat(indent);
        let name = self.func_name();
        let arg = self.name();
        let mut out = Vec::new();
        match self.language {
            Language::Python => {
                if self.rng.gen_bool(0.2) {
                    out.push(format!("{pad}{}", if method { "@staticmethod" } else { "@cache" }));
                }
                let params = if method && !out.is_empty() { arg.to_owned() } else if method { format!("self, {arg}") } else { arg.to_owned() };
                out.push(format!("{pad}def {name}({params}):"));
                if self.rng.gen_bool(0.2) {
                    out.push(format!("{pad}    \"\"\"{}.\"\"\"", COMMENTS.choose(&mut self.rng).copied().unwrap_or("doc")));
                }
                self.body(indent + 4, 0, &mut out);
                out.push(format!("{pad}    return {}", self.expr()));
            }
            Language::JavaScript => {
                let header = if method {
                    format!("{pad}{name}({arg}) {{")
                } else if self.rng.gen_bool(0.3) {
                    format!("{pad}const {name} = ({arg}) => {{")
                } else {
                    format!("{pad}function {name}({arg}) {{")
                };
                let arrow = header.contains("=>");
                out.push(header);
                self.body(indent + 2, 0, &mut out);
                out.push(format!("{pad}  return {};", self.expr()));
                out.push(format!("{pad}}}{}", if arrow { ";" } else { "" }));
            }
        }
        out
    }

    fn class(&mut self) -> Vec<String> {
        let name = format!("{}{}", CLASSES.choose(&mut self.rng).copied().unwrap_or("C"), self.rng.gen_range(0..5));
        let mut out = Vec::new();
        match self.language {
            Language::Python => {
                out.push(format!("class {name}:"));
                for _ in 0..self.rng.gen_range(0..3) {
                    out.push(format!("    {} = {}", self.name(), self.number()));
                }
                for i in 0..self.rng.gen_range(1..4) {
                    if i > 0 || out.len() > 1 {
                        out.push(String::new());
                    }
                    out.extend(self.function(4, true));
                }
            }
            Language::JavaScript => {
                out.push(format!("class {name} {{"));
                for i in 0..self.rng.gen_range(1..4) {
                    if i > 0 {
                        out.push(String::new());
                    }
                    out.extend(self.function(2, true));
                }
                out.push("}".to_owned());
            }
        }
        out
    }

    fn header(&mut self) -> Vec<String> {
        match self.language {
            Language::Python => {
                let mut v = vec!["import os".to_owned(), "from functools import cache".to_owned()];
                if self.rng.gen_bool(0.5) {
                    v.push("import sys".to_owned());
                }
                v
            }
            Language::JavaScript => vec!["'use strict';".to_owned(), "const fs = require('fs');".to_owned()],
        }
    }

    /// A complete file of roughly `target_lines` lines.
    pub fn file(&mut self, target_lines: usize) -> String {
        self.lines = self.header();
        self.emitted_functions.clear();
        while self.lines.len() < target_lines {
            let item = match self.rng.gen_range(0..12) {
                0..=5 => {
                    let f = self.function(0, false);
                    self.emitted_functions.push(f.clone());
                    f
                }
                6 | 7 => self.class(),
                8 if !self.emitted_functions.is_empty() => {
                    // Verbatim duplicate of an earlier function.
                    self.emitted_functions.choose(&mut self.rng).cloned().unwrap_or_default()
                }
                9 => vec![self.comment(0), self.simple(0)],
                10 => {
                    let mut v = Vec::new();
                    self.statement(0, 1, &mut v);
                    v
                }
                _ => vec![self.simple(0)],
            };
            let gap = match self.language {
                Language::Python => self.rng.gen_range(0..=2),
                Language::JavaScript => self.rng.gen_range(0..=1),
            };
            self.lines.resize(self.lines.len() + gap, String::new());
            self.lines.extend(item);
        }
        let mut text = self.lines.join("\n");
        if self.rng.gen_bool(0.9) {
            text.push('\n');
        }
        text
    }

    fn mutate_once(&mut self, lines: &mut Vec<String>, trailing: &mut bool) {
        let n = lines.len();
        if n == 0 {
            lines.push(self.simple(0));
            return;
        }
        let at = self.rng.gen_range(0..n);
        let indent = lines[at].len() - lines[at].trim_start().len();
        match self.rng.gen_range(0..11) {
            0 | 1 => {
                // Change a token on one line.
                let line = &lines[at];
                let replaced = if let Some(pos) = line.find(|c: char| c.is_ascii_digit()) {
                    format!("{}{}{}", &line[..pos], self.rng.gen_range(0..1000), &line[pos + 1..])
                } else if line.trim().is_empty() {
                    self.simple(indent)
                } else {
                    let a = self.name();
                    let b = self.name();
                    let r = line.replacen(a, b, 1);
                    if r == *line { format!("{line}  ") } else { r }
                };
                lines[at] = replaced;
            }
            2 | 3 => {
                let deeper = lines[at].trim_end().ends_with(':') || lines[at].trim_end().ends_with('{');
                let step = if self.language == Language::Python { 4 } else { 2 };
                let stmt = self.simple(if deeper { indent + step } else { indent });
                lines.insert(at + 1, stmt);
            }
            4 => {
                let len = self.rng.gen_range(1..=3).min(n - at);
                lines.drain(at..at + len);
            }
            5 => {
                // Insert a new function at a top-level boundary.
                let mut f = self.function(0, false);
                f.insert(0, String::new());
                let pos = (at..n).find(|&i| i + 1 == n || lines[i + 1].is_empty()).map_or(n, |i| i + 1);
                lines.splice(pos..pos, f);
            }
            6 | 7 => {
                // Delete or rewrite the block starting at the nearest header at or above `at`.
                let start = (0..=at).rev().find(|&i| is_header(&lines[i])).unwrap_or(at);
                let base = lines[start].len() - lines[start].trim_start().len();
                let mut end = start + 1;
                while end < n && (lines[end].trim().is_empty() || lines[end].len() - lines[end].trim_start().len() > base) {
                    end += 1;
                }
                if self.language == Language::JavaScript && end < n && lines[end].trim_start().starts_with('}') {
                    end += 1;
                }
                if self.rng.gen_bool(0.5) {
                    lines.drain(start..end);
                } else {
                    let f = self.function(base, base > 0);
                    lines.splice(start..end, f);
                }
            }
            8 => {
                // Copy a line elsewhere, creating repeated lines.
                let copy = lines[at].clone();
                let to = self.rng.gen_range(0..=n);
                lines.insert(to, copy);
            }
            9 => *trailing = !*trailing,
            _ => {
                let c = self.comment(indent);
                lines.insert(at, c);
            }
        }
    }

    /// Applies one to three random edits to `source`.
    pub fn mutate(&mut self, source: &str) -> String {
        let mut lines: Vec<String> = source.lines().map(str::to_owned).collect();
        let mut trailing = source.is_empty() || source.ends_with('\n');
        for _ in 0..self.rng.gen_range(1..=3) {
            self.mutate_once(&mut lines, &mut trailing);
        }
        let mut text = lines.join("\n");
        if trailing && !lines.is_empty() {
            text.push('\n');
        }
        text
    }
}

fn is_header(line: &str) -> bool {
    let t = line.trim_start();
    t.starts_with("def ")
        || t.starts_with("class ")
        || t.starts_with("function ")
        || (t.starts_with("const ") && t.contains("=>"))
        || t.starts_with('@')
}

/// A source/target pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pair {
    pub language: Language,
    pub source: String,
    pub target: String,
}

/// `count` pairs with sources of `min_lines..=max_lines` lines (log-uniform)
/// and one to three edits each. Pairs whose edit is a no-op are skipped.
pub fn corpus(seed: u64, count: usize, language: Language, min_lines: usize, max_lines: usize) -> Vec<Pair> {
    let mut g = Generator::new(seed, language);
    let mut out = Vec::with_capacity(count);
    let (lo, hi) = ((min_lines.max(1)) as f64, (max_lines.max(min_lines).max(1)) as f64);
    while out.len() < count {
        let size = (lo.ln() + g.rng.gen::<f64>() * (hi.ln() - lo.ln())).exp().round() as usize;
        let source = g.file(size.max(min_lines));
        let source = truncate_lines(&source, max_lines);
        let target = g.mutate(&source);
        if target != source {
            out.push(Pair { language, source, target });
        }
    }
    out
}

fn truncate_lines(text: &str, max: usize) -> String {
    let lines: Vec<&str> = text.lines().collect();
    if lines.len() <= max {
        return text.to_owned();
    }
    let mut t = lines[..max].join("\n");
    t.push('\n');
    t
}

/// A file of at least `min_lines` lines.
pub fn large_file(seed: u64, language: Language, min_lines: usize) -> String {
    Generator::new(seed, language).file(min_lines)
}
