use std::path::Path;

use adaedit_bench::{large_edit, mutation_corpus};
use adaedit_core::structdiff::build_tree;
use adaedit_core::{apply_edit, generate_edit, BpeCounter, EditFormat, FormatOptions, Granularity, LanguageProfile, TokenCounter};
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn corpus_generation(c: &mut Criterion) {
    let pairs = mutation_corpus(50);
    let mut group = c.benchmark_group("generate/corpus");
    for format in EditFormat::DIFFS {
        group.bench_with_input(BenchmarkId::from_parameter(format), &format, |b, &format| {
            b.iter(|| {
                for w in &pairs {
                    let opts = FormatOptions::for_language(w.language);
                    black_box(generate_edit(format, &w.source, &w.target, &opts).unwrap());
                }
            })
        });
    }
    group.finish();
}

fn corpus_patching(c: &mut Criterion) {
    let pairs = mutation_corpus(50);
    let mut group = c.benchmark_group("patch/corpus");
    for format in EditFormat::DIFFS {
        let edits: Vec<String> = pairs
            .iter()
            .map(|w| generate_edit(format, &w.source, &w.target, &FormatOptions::for_language(w.language)).unwrap())
            .collect();
        group.bench_with_input(BenchmarkId::from_parameter(format), &format, |b, &format| {
            b.iter(|| {
                for (w, edit) in pairs.iter().zip(&edits) {
                    let opts = FormatOptions::for_language(w.language);
                    black_box(apply_edit(format, &w.source, edit, &opts).unwrap());
                }
            })
        });
    }
    group.finish();
}

fn large_file(c: &mut Criterion) {
    let w = large_edit();
    let opts = FormatOptions::for_language(w.language);
    let profile = LanguageProfile::for_language(w.language);
    let edit = generate_edit(EditFormat::BlockDiff, &w.source, &w.target, &opts).unwrap();
    let mut group = c.benchmark_group("large_file");
    group.sample_size(10);
    group.bench_function("blocktree", |b| b.iter(|| black_box(build_tree(&w.source, &profile, Granularity::Fine).unwrap())));
    group.bench_function("blockdiff/generate", |b| {
        b.iter(|| black_box(generate_edit(EditFormat::BlockDiff, &w.source, &w.target, &opts).unwrap()))
    });
    group.bench_function("blockdiff/patch", |b| b.iter(|| black_box(apply_edit(EditFormat::BlockDiff, &w.source, &edit, &opts).unwrap())));
    group.finish();
}

fn token_counting(c: &mut Criterion) {
    let text = large_edit().source.to_text();
    let vocab = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/bpe_vocab.json");
    let bpe = BpeCounter::from_path(&vocab).unwrap();
    c.bench_function("count/bpe_large_file", |b| b.iter(|| black_box(bpe.count(&text))));
}

criterion_group!(benches, corpus_generation, corpus_patching, large_file, token_counting);
criterion_main!(benches);
