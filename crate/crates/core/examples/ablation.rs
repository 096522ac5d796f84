//! Compares feature conditions on one synthetic train/held-out split.
//!
//! ```text
//! cargo run --release -p proplab --example ablation
//! ```

use proplab::category::CategoryLexicon;
use proplab::corpus::extract_labeled_spans;
use proplab::embeddings::EmbeddingProvider;
use proplab::emotion::EmotionProvider;
use proplab::eval::per_technique_f1;
use proplab::features::{Condition, Featurizer};
use proplab::net::ModelConfig;
use proplab::pipeline::{gold_rows, predict_set, train_condition};
use proplab::synthetic::{SyntheticCorpus, SyntheticSpec};

const DICTIONARY: &str =
    "%\n1\tanger\n2\tposemo\n%\nfury\t1\nrage\t1\nhatred\t1\nhope\t2\nproud\t2\n";

fn main() -> proplab::Result<()> {
    let spec = SyntheticSpec {
        per_class: 60,
        ..SyntheticSpec::default()
    };
    let train_corpus = SyntheticCorpus::generate(&spec)?;
    let test_corpus = SyntheticCorpus::generate(&SyntheticSpec {
        per_class: 20,
        seed: 11,
        ..spec
    })?;
    let featurizer = Featurizer {
        embedding: EmbeddingProvider::Hash { dim: 256 },
        emotion: EmotionProvider::Lexicon(train_corpus.lexicon.clone()),
        category: Some(CategoryLexicon::parse(
            std::path::Path::new("inline.dic"),
            DICTIONARY,
        )?),
        with_context: true,
    };
    let train_set = featurizer.featurize(&extract_labeled_spans(
        &train_corpus.articles,
        &train_corpus.annotations,
        3,
    )?)?;
    let test_set = featurizer.featurize(&extract_labeled_spans(
        &test_corpus.articles,
        &test_corpus.annotations,
        3,
    )?)?;
    let gold = gold_rows(&test_set)?;

    let base = ModelConfig {
        max_epochs: 40,
        seed: 1,
        ..ModelConfig::default()
    };
    println!("{:<24} {:>8} {:>8}", "condition", "epochs", "micro-F1");
    for condition in Condition::ALL {
        let run = train_condition(&train_set, condition, &base)?;
        let report = per_technique_f1(&predict_set(&run.model, &run.schema, &test_set)?, &gold)?;
        println!(
            "{:<24} {:>8} {:>8.4}",
            condition.name(),
            run.log.epochs.len(),
            report.micro_f1
        );
    }
    Ok(())
}
