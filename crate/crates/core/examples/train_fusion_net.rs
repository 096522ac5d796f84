//! Trains the fusion network on a synthetic 14-technique corpus and scores a
//! separately generated held-out corpus.
//!
//! ```text
//! cargo run --release -p proplab --example train_fusion_net
//! ```

use std::time::Instant;

use proplab::corpus::extract_labeled_spans;
use proplab::embeddings::{EmbeddingProvider, DEFAULT_DIM};
use proplab::emotion::EmotionProvider;
use proplab::eval::per_technique_f1;
use proplab::features::{Condition, Featurizer};
use proplab::net::ModelConfig;
use proplab::pipeline::{gold_rows, predict_set, train_condition};
use proplab::synthetic::{SyntheticCorpus, SyntheticSpec};

fn main() -> proplab::Result<()> {
    let train_corpus = SyntheticCorpus::generate(&SyntheticSpec::default())?;
    let test_corpus = SyntheticCorpus::generate(&SyntheticSpec {
        per_class: 50,
        seed: 7,
        ..SyntheticSpec::default()
    })?;
    let featurizer = Featurizer {
        embedding: EmbeddingProvider::Hash { dim: DEFAULT_DIM },
        emotion: EmotionProvider::Lexicon(train_corpus.lexicon.clone()),
        category: None,
        with_context: false,
    };
    let train_spans = extract_labeled_spans(&train_corpus.articles, &train_corpus.annotations, 3)?;
    let test_spans = extract_labeled_spans(&test_corpus.articles, &test_corpus.annotations, 3)?;
    let train_set = featurizer.featurize(&train_spans)?;
    let test_set = featurizer.featurize(&test_spans)?;

    let base = ModelConfig {
        max_epochs: 50,
        seed: 42,
        ..ModelConfig::default()
    };
    for condition in [Condition::LogisticBaseline, Condition::EmbedEmotion] {
        let started = Instant::now();
        let run = train_condition(&train_set, condition, &base)?;
        let preds = predict_set(&run.model, &run.schema, &test_set)?;
        let report = per_technique_f1(&preds, &gold_rows(&test_set)?)?;
        let best = run.log.best().expect("at least one epoch");
        println!(
            "{condition:<20} epochs {:>3}  best val micro-F1 {:.4} (epoch {})  held-out micro-F1 {:.4}  {:.1?}",
            run.log.epochs.len(),
            best.val_micro_f1,
            best.epoch,
            report.micro_f1,
            started.elapsed()
        );
    }
    Ok(())
}
