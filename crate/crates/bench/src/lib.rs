//! Shared workloads for the criterion benches.

use adaedit_core::synth::{corpus, large_file};
use adaedit_core::{scatter_edits, Language, LineSequence};

/// A source/target pair as line sequences.
pub struct Workload {
    pub language: Language,
    pub source: LineSequence,
    pub target: LineSequence,
}

/// Seeded mutation pairs of 5 to 500 lines.
pub fn mutation_corpus(count: usize) -> Vec<Workload> {
    corpus(17, count, Language::Python, 5, 500)
        .into_iter()
        .map(|p| Workload {
            language: p.language,
            source: LineSequence::from_text(&p.source),
            target: LineSequence::from_text(&p.target),
        })
        .collect()
}

/// A file of over 10,000 lines with scattered edits.
pub fn large_edit() -> Workload {
    let source = large_file(2024, Language::Python, 10_001);
    let target = scatter_edits(&source, Language::Python, 2024, 8);
    Workload { language: Language::Python, source: LineSequence::from_text(&source), target: LineSequence::from_text(&target) }
}
