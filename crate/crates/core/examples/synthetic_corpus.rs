//! Writes a synthetic training corpus and held-out corpus for trying the CLI.
//!
//! ```text
//! cargo run -p proplab --example synthetic_corpus -- /tmp/synth
//! proplab validate --articles /tmp/synth/train/articles --labels /tmp/synth/train/labels.tsv
//! ```

use std::path::PathBuf;

use proplab::synthetic::{SyntheticCorpus, SyntheticSpec};

fn main() -> proplab::Result<()> {
    let root = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "synthetic-data".into()),
    );
    let train = SyntheticCorpus::generate(&SyntheticSpec::default())?;
    let test = SyntheticCorpus::generate(&SyntheticSpec {
        per_class: 50,
        seed: 7,
        ..SyntheticSpec::default()
    })?;
    for (name, corpus) in [("train", &train), ("test", &test)] {
        let paths = corpus.write(&root.join(name))?;
        println!(
            "{name}: {} articles, {} spans -> {}",
            corpus.articles.len(),
            corpus.annotations.len(),
            paths.labels.display()
        );
    }
    Ok(())
}
