//! Loads a span-annotated corpus and prints each segment with its context.
//!
//! ```text
//! cargo run -p proplab --example corpus_segments [ARTICLES_DIR LABELS_TSV]
//! ```

use std::path::PathBuf;

use proplab::corpus::{
    extract_labeled_spans, load_annotations, load_corpus, DEFAULT_CONTEXT_WINDOW,
};

fn main() -> proplab::Result<()> {
    let fixture = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/scored_segments");
    let mut args = std::env::args().skip(1);
    let articles = args
        .next()
        .map(PathBuf::from)
        .unwrap_or(fixture.join("articles"));
    let labels = args
        .next()
        .map(PathBuf::from)
        .unwrap_or(fixture.join("labels.tsv"));

    let corpus = load_corpus(&articles)?;
    let annotations = load_annotations(&labels)?;
    let spans = extract_labeled_spans(&corpus, &annotations, DEFAULT_CONTEXT_WINDOW)?;
    println!(
        "{} articles, {} rows, {} distinct spans",
        corpus.len(),
        annotations.len(),
        spans.len()
    );
    for s in &spans {
        let labels: Vec<&str> = s.labels.iter().map(|t| t.name()).collect();
        println!("{}  [{}]", s.segment.key, labels.join(", "));
        println!("  surface: {}", s.segment.surface);
        println!("  tokens:  {:?}", s.segment.tokens);
        println!(
            "  context: {:?} | {:?}",
            s.segment.left_context, s.segment.right_context
        );
    }
    Ok(())
}
