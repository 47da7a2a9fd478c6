//! Token counters used to compare edit representations.

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, Mutex};

use fancy_regex::Regex;
use serde_json::Value;

use crate::error::{EditError, Result};

/// Pre-tokenization pattern of byte-level BPE tokenizers in the GPT-2 family.
pub const GPT2_PATTERN: &str = r"'s|'t|'re|'ve|'m|'ll|'d| ?\p{L}+| ?\p{N}+| ?[^\s\p{L}\p{N}]+|\s+(?!\S)|\s+";

pub trait TokenCounter: Send + Sync {
    fn name(&self) -> &str;
    fn count(&self, text: &str) -> usize;
}

/// One token per Unicode scalar value.
#[derive(Debug, Clone, Copy, Default)]
pub struct CharCounter;

impl TokenCounter for CharCounter {
    fn name(&self) -> &str {
        "chars"
    }

    fn count(&self, text: &str) -> usize {
        text.chars().count()
    }
}

/// One token per whitespace-separated word.
#[derive(Debug, Clone, Copy, Default)]
pub struct WhitespaceCounter;

impl TokenCounter for WhitespaceCounter {
    fn name(&self) -> &str {
        "ws"
    }

    fn count(&self, text: &str) -> usize {
        text.split_whitespace().count()
    }
}

/// Greedy byte-pair encoding from a merge list.
///
/// Reads JSON with a `merges` list (`"a b"` strings or `["a", "b"]` pairs),
/// either at the top level or under `model` as in `tokenizer.json`. A
/// `pattern` string, or a `Split` regex in `pre_tokenizer`, replaces the
/// default pre-tokenization pattern. `"byte_level": false` disables the
/// byte-to-unicode mapping.
pub struct BpeCounter {
    name: String,
    /// Symbol text by id; ids below `names.len()` are interned symbols.
    names: Vec<String>,
    ids: HashMap<String, u32>,
    /// Adjacent symbol pair to (rank, merged symbol).
    merges: HashMap<(u32, u32), (u32, u32)>,
    pattern: Regex,
    byte_level: bool,
    byte_ids: [u32; 256],
    cache: Mutex<HashMap<String, usize>>,
}

/// Pieces kept in the count cache before it is cleared.
const CACHE_LIMIT: usize = 1 << 16;

/// The reversible byte-to-printable-character table of byte-level BPE.
fn bytes_to_unicode() -> [char; 256] {
    let mut table = ['\0'; 256];
    let mut extra = 0u32;
    for b in 0..256u32 {
        let printable = (33..=126).contains(&b) || (161..=172).contains(&b) || (174..=255).contains(&b);
        table[b as usize] = if printable {
            char::from_u32(b).expect("latin-1")
        } else {
            extra += 1;
            char::from_u32(255 + extra).expect("valid scalar")
        };
    }
    table
}

fn find_split_pattern(value: &Value) -> Option<String> {
    match value {
        Value::Object(map) => {
            if map.get("type").and_then(Value::as_str) == Some("Split") {
                if let Some(p) = map.get("pattern").and_then(|p| p.get("Regex")).and_then(Value::as_str) {
                    return Some(p.to_owned());
                }
            }
            map.values().find_map(find_split_pattern)
        }
        Value::Array(items) => items.iter().find_map(find_split_pattern),
        _ => None,
    }
}

impl BpeCounter {
    pub fn from_json(name: impl Into<String>, json: &str) -> Result<Self> {
        let unavailable = |msg: String| EditError::CounterUnavailable(msg);
        let root: Value = serde_json::from_str(json).map_err(|e| unavailable(format!("invalid vocabulary JSON: {e}")))?;
        let model = root.get("model").filter(|m| m.get("merges").is_some()).unwrap_or(&root);
        let merges = model
            .get("merges")
            .and_then(Value::as_array)
            .ok_or_else(|| unavailable("vocabulary has no `merges` list".into()))?;
        let mut counter = BpeCounter {
            name: name.into(),
            names: Vec::new(),
            ids: HashMap::new(),
            merges: HashMap::with_capacity(merges.len()),
            pattern: Regex::new(GPT2_PATTERN).expect("default pattern"),
            byte_level: true,
            byte_ids: [0; 256],
            cache: Mutex::new(HashMap::new()),
        };
        for (i, c) in bytes_to_unicode().iter().enumerate() {
            counter.byte_ids[i] = counter.intern(&c.to_string());
        }
        for (rank, m) in merges.iter().enumerate() {
            let (a, b) = match m {
                Value::String(s) => s.split_once(' '),
                Value::Array(v) if v.len() == 2 => v[0].as_str().zip(v[1].as_str()),
                _ => None,
            }
            .ok_or_else(|| unavailable(format!("malformed merge entry {rank}")))?;
            let (ia, ib) = (counter.intern(a), counter.intern(b));
            let merged = counter.intern(&format!("{a}{b}"));
            counter.merges.entry((ia, ib)).or_insert((rank as u32, merged));
        }
        let pattern_src = root
            .get("pattern")
            .and_then(Value::as_str)
            .map(str::to_owned)
            .or_else(|| root.get("pre_tokenizer").and_then(find_split_pattern))
            .unwrap_or_else(|| GPT2_PATTERN.to_owned());
        counter.pattern = Regex::new(&pattern_src).map_err(|e| unavailable(format!("bad pre-tokenizer pattern: {e}")))?;
        counter.byte_level = root.get("byte_level").and_then(Value::as_bool).unwrap_or(true);
        Ok(counter)
    }

    fn intern(&mut self, symbol: &str) -> u32 {
        if let Some(&id) = self.ids.get(symbol) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(symbol.to_owned());
        self.ids.insert(symbol.to_owned(), id);
        id
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let json = std::fs::read_to_string(path)
            .map_err(|e| EditError::CounterUnavailable(format!("{}: {e}", path.display())))?;
        Self::from_json(format!("bpe:{}", path.display()), &json)
    }

    /// Initial symbols of a piece. Characters outside the vocabulary get
    /// ids past the interned range that never merge.
    fn symbols(&self, piece: &str) -> Vec<u32> {
        if self.byte_level {
            piece.bytes().map(|b| self.byte_ids[b as usize]).collect()
        } else {
            piece
                .chars()
                .map(|c| {
                    let mut buf = [0; 4];
                    self.ids.get(&*c.encode_utf8(&mut buf)).copied().unwrap_or(u32::MAX - c as u32)
                })
                .collect()
        }
    }

    fn symbol_text(&self, id: u32) -> String {
        match self.names.get(id as usize) {
            Some(name) => name.clone(),
            None => char::from_u32(u32::MAX - id).map(String::from).unwrap_or_default(),
        }
    }

    /// Greedily applies the lowest-ranked merge until none applies.
    fn merge(&self, mut symbols: Vec<u32>) -> Vec<u32> {
        loop {
            let best = symbols.windows(2).filter_map(|w| self.merges.get(&(w[0], w[1]))).min();
            let Some(&(rank, merged_id)) = best else {
                return symbols;
            };
            let mut merged = Vec::with_capacity(symbols.len());
            let mut i = 0;
            while i < symbols.len() {
                if i + 1 < symbols.len() && self.merges.get(&(symbols[i], symbols[i + 1])).is_some_and(|m| m.0 == rank) {
                    merged.push(merged_id);
                    i += 2;
                } else {
                    merged.push(symbols[i]);
                    i += 1;
                }
            }
            symbols = merged;
        }
    }

    pub fn encode_piece(&self, piece: &str) -> Vec<String> {
        self.merge(self.symbols(piece)).into_iter().map(|id| self.symbol_text(id)).collect()
    }

    fn piece_count(&self, piece: &str) -> usize {
        if let Some(&n) = self.cache.lock().expect("cache lock").get(piece) {
            return n;
        }
        let n = self.merge(self.symbols(piece)).len();
        let mut cache = self.cache.lock().expect("cache lock");
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(piece.to_owned(), n);
        n
    }

    /// Pre-tokenized pieces of `text`.
    pub fn pieces<'t>(&self, text: &'t str) -> Vec<&'t str> {
        self.pattern.find_iter(text).filter_map(|m| m.ok()).map(|m| m.as_str()).collect()
    }
}

impl TokenCounter for BpeCounter {
    fn name(&self) -> &str {
        &self.name
    }

    fn count(&self, text: &str) -> usize {
        self.pieces(text).into_iter().map(|p| self.piece_count(p)).sum()
    }
}

/// Builds a counter from `chars`, `ws` or `bpe:<path>`.
pub fn counter_from_spec(spec: &str) -> Result<Arc<dyn TokenCounter>> {
    match spec {
        "chars" | "char" => Ok(Arc::new(CharCounter)),
        "ws" | "whitespace" => Ok(Arc::new(WhitespaceCounter)),
        _ => match spec.strip_prefix("bpe:") {
            Some(path) => Ok(Arc::new(BpeCounter::from_path(Path::new(path))?)),
            None => Err(EditError::CounterUnavailable(format!("unknown tokenizer `{spec}`"))),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_counters() {
        assert_eq!(CharCounter.count("héllo\n"), 6);
        assert_eq!(WhitespaceCounter.count("  a b\n\tc "), 3);
    }

    #[test]
    fn byte_table_is_a_bijection() {
        let t = bytes_to_unicode();
        let distinct: std::collections::HashSet<char> = t.iter().copied().collect();
        assert_eq!(distinct.len(), 256);
        assert_eq!(t[b' ' as usize], 'Ġ');
        assert_eq!(t[b'\n' as usize], 'Ċ');
        assert_eq!(t[b'a' as usize], 'a');
    }

    #[test]
    fn merges_follow_rank_order() {
        let bpe = BpeCounter::from_json("t", r#"{"merges": ["a b", "ab c", ["b", "c"]]}"#).unwrap();
        assert_eq!(bpe.encode_piece("abc"), vec!["abc"]);
        assert_eq!(bpe.encode_piece("bcab"), vec!["bc", "ab"]);
        assert_eq!(bpe.count("abc abc"), 3);
    }

    #[test]
    fn unknown_spec_is_unavailable() {
        assert!(matches!(counter_from_spec("nope"), Err(EditError::CounterUnavailable(_))));
        assert!(matches!(counter_from_spec("bpe:/does/not/exist"), Err(EditError::CounterUnavailable(_))));
    }
}
