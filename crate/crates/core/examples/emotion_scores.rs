//! Emotion features two ways: averaging a word lexicon, and reading a
//! precomputed per-segment score file that re-exports unchanged.

use std::path::PathBuf;

use proplab::corpus::tokenize;
use proplab::emotion::{
    score_with_lexicon, EmotionLexicon, EmotionScores, PrecomputedEmotionStore, DIMENSION_NAMES,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lexicon = EmotionLexicon::from_entries([
        (
            "traitors",
            EmotionScores::new([0.09, 0.03, 0.88, 0.57, 0.45])?,
        ),
        ("hope", EmotionScores::new([0.81, 0.63, 0.12, 0.20, 0.18])?),
    ]);
    for text in ["These traitors sold out our hope", "Nothing to see here"] {
        let s = score_with_lexicon(&tokenize(&text.to_lowercase()), &lexicon);
        let cells: Vec<String> = DIMENSION_NAMES
            .iter()
            .zip(s.to_array())
            .map(|(n, v)| format!("{n}={v:.3}"))
            .collect();
        println!("{text:<36} {}", cells.join(" "));
    }

    let path =
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/scored_segments/emotion_scores.tsv");
    let store = PrecomputedEmotionStore::load(&path)?;
    let original = std::fs::read_to_string(&path)?;
    println!(
        "\n{} precomputed segments; export identical to input: {}",
        store.len(),
        store.to_tsv() == original
    );
    print!("{}", store.to_tsv());
    Ok(())
}
