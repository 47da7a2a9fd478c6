//! The BPE counter against counts frozen from two independent reference
//! implementations (see `fixtures/make_bpe_fixture.py`).

mod common;

use adaedit_core::{counter_from_spec, BpeCounter, TokenCounter};

const FROZEN: &[(&str, usize)] = &[
    ("bpe_snippet_python.txt", 449),
    ("bpe_snippet_javascript.txt", 300),
    ("bpe_snippet_unicode.txt", 68),
];

fn vocab() -> BpeCounter {
    BpeCounter::from_path(&common::fixture("bpe_vocab.json")).unwrap()
}

#[test]
fn counts_match_reference() {
    let bpe = vocab();
    for &(name, expected) in FROZEN {
        let text = std::fs::read_to_string(common::fixture(name)).unwrap();
        assert_eq!(bpe.count(&text), expected, "{name}");
    }
}

#[test]
fn python_snippet_is_about_one_kib() {
    let text = std::fs::read_to_string(common::fixture("bpe_snippet_python.txt")).unwrap();
    assert!((1000..1200).contains(&text.len()));
}

#[test]
fn tokenizer_string_loads_the_same_vocab() {
    let path = common::fixture("bpe_vocab.json");
    let counter = counter_from_spec(&format!("bpe:{}", path.display())).unwrap();
    assert_eq!(counter.count(""), 0);
    assert_eq!(counter.count("def f():\n    return 1\n"), vocab().count("def f():\n    return 1\n"));
}

#[test]
fn tokenizer_json_layout_is_accepted() {
    let json = r#"{"model": {"type": "BPE", "vocab": {}, "merges": ["a b", "ab c"]},
                   "pre_tokenizer": {"type": "Sequence", "pretokenizers": [
                       {"type": "Split", "pattern": {"Regex": "\\s+|[^\\s]+"}, "behavior": "Isolated"},
                       {"type": "ByteLevel"}]}}"#;
    let bpe = BpeCounter::from_json("t", json).unwrap();
    assert_eq!(bpe.pieces("abc abd"), vec!["abc", " ", "abd"]);
    assert_eq!(bpe.count("abc abd"), 1 + 1 + 2);
}

#[test]
fn invalid_vocab_is_unavailable() {
    assert!(BpeCounter::from_json("t", "{}").is_err());
    assert!(BpeCounter::from_json("t", "not json").is_err());
}
