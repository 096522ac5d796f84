//! The five-dimensional emotional-salience block.
//!
//! Scores come from one of two providers: a token lexicon averaged over the
//! segment, or a store of precomputed per-segment scores (for instance written
//! by [`crate::score_client`]).

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Segment;
use crate::error::{read_text, write_text, Error, Result};

pub const EMOTION_DIMS: usize = 5;
pub const DIMENSION_NAMES: [&str; EMOTION_DIMS] = ["valence", "joy", "anger", "fear", "sadness"];

/// Returned when no lexicon term matches a segment.
pub const NEUTRAL: EmotionScores = EmotionScores {
    valence: 0.5,
    joy: 0.2,
    anger: 0.2,
    fear: 0.2,
    sadness: 0.2,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmotionScores {
    pub valence: f64,
    pub joy: f64,
    pub anger: f64,
    pub fear: f64,
    pub sadness: f64,
}

impl EmotionScores {
    /// Builds scores from `[valence, joy, anger, fear, sadness]`, rejecting
    /// NaN and anything outside `[0, 1]`.
    pub fn new(values: [f64; EMOTION_DIMS]) -> Result<Self> {
        for (v, name) in values.iter().zip(DIMENSION_NAMES) {
            if !(0.0..=1.0).contains(v) {
                return Err(Error::OutOfRange {
                    field: name.to_string(),
                    value: *v,
                });
            }
        }
        let [valence, joy, anger, fear, sadness] = values;
        Ok(EmotionScores {
            valence,
            joy,
            anger,
            fear,
            sadness,
        })
    }

    pub fn to_array(self) -> [f64; EMOTION_DIMS] {
        [self.valence, self.joy, self.anger, self.fear, self.sadness]
    }

    pub fn get(&self, dim: usize) -> f64 {
        self.to_array()[dim]
    }
}

#[derive(Debug, Clone, Default)]
pub struct EmotionLexicon {
    entries: HashMap<String, EmotionScores>,
}

impl EmotionLexicon {
    pub fn from_entries<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, EmotionScores)>,
        S: AsRef<str>,
    {
        EmotionLexicon {
            entries: entries
                .into_iter()
                .map(|(k, v)| (k.as_ref().to_lowercase(), v))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&EmotionScores> {
        self.entries.get(token)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        let rows = parse_score_table(path, &text, "term")?;
        let mut entries = HashMap::with_capacity(rows.len());
        for row in rows {
            let term = row.key.to_lowercase();
            if entries.insert(term.clone(), row.scores).is_some() {
                return Err(Error::DuplicateKey(term));
            }
        }
        Ok(EmotionLexicon { entries })
    }
}

/// Mean of each dimension over the tokens found in `lex`; [`NEUTRAL`] if none match.
pub fn score_with_lexicon(tokens: &[String], lex: &EmotionLexicon) -> EmotionScores {
    let mut sums = [0.0; EMOTION_DIMS];
    let mut hits = 0usize;
    for scores in tokens.iter().filter_map(|t| lex.get(t)) {
        for (s, v) in sums.iter_mut().zip(scores.to_array()) {
            *s += v;
        }
        hits += 1;
    }
    if hits == 0 {
        return NEUTRAL;
    }
    let n = hits as f64;
    let [valence, joy, anger, fear, sadness] = sums.map(|s| (s / n).clamp(0.0, 1.0));
    EmotionScores {
        valence,
        joy,
        anger,
        fear,
        sadness,
    }
}

struct ScoreRow {
    key: String,
    scores: EmotionScores,
    raw: [String; EMOTION_DIMS],
}

fn parse_score_table(path: &Path, text: &str, key_column: &str) -> Result<Vec<ScoreRow>> {
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((_, l)) => break l,
            None => return Err(Error::parse(path, 1, "missing header")),
        }
    };
    let expected: Vec<&str> = std::iter::once(key_column).chain(DIMENSION_NAMES).collect();
    let found: Vec<&str> = header.split('\t').map(str::trim).collect();
    if found != expected {
        return Err(Error::parse(
            path,
            1,
            format!(
                "expected header {:?}, found {:?}",
                expected.join("\t"),
                header
            ),
        ));
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 1 + EMOTION_DIMS {
            return Err(Error::parse(
                path,
                i + 1,
                format!(
                    "expected {} fields, found {}",
                    1 + EMOTION_DIMS,
                    fields.len()
                ),
            ));
        }
        let mut values = [0.0; EMOTION_DIMS];
        for (v, field) in values.iter_mut().zip(&fields[1..]) {
            *v = field
                .trim()
                .parse()
                .map_err(|_| Error::parse(path, i + 1, format!("invalid number {field:?}")))?;
        }
        let scores = EmotionScores::new(values)?;
        let raw = std::array::from_fn(|d| fields[1 + d].trim().to_string());
        rows.push(ScoreRow {
            key: fields[0].to_string(),
            scores,
            raw,
        });
    }
    Ok(rows)
}

/// Per-segment scores keyed by segment key string, in insertion order.
///
/// The decimal strings read from disk are kept so that exporting reproduces
/// the input text exactly.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PrecomputedEmotionStore {
    index: HashMap<String, usize>,
    rows: Vec<(String, EmotionScores, Option<[String; EMOTION_DIMS]>)>,
}

impl PrecomputedEmotionStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn contains(&self, key: &str) -> bool {
        self.index.contains_key(key)
    }

    pub fn get(&self, key: &str) -> Option<EmotionScores> {
        self.index.get(key).map(|&i| self.rows[i].1)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.rows.iter().map(|r| r.0.as_str())
    }

    fn push(
        &mut self,
        key: String,
        scores: EmotionScores,
        raw: Option<[String; EMOTION_DIMS]>,
    ) -> Result<()> {
        if self.index.contains_key(&key) {
            return Err(Error::DuplicateKey(key));
        }
        self.index.insert(key.clone(), self.rows.len());
        self.rows.push((key, scores, raw));
        Ok(())
    }

    /// Inserts freshly computed scores; fails on a duplicate key.
    pub fn insert(&mut self, key: impl Into<String>, scores: EmotionScores) -> Result<()> {
        self.push(key.into(), scores, None)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        Self::parse(path, &text)
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let mut store = Self::new();
        for row in parse_score_table(path, text, "key")? {
            store.push(row.key, row.scores, Some(row.raw))?;
        }
        Ok(store)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = format!("key\t{}\n", DIMENSION_NAMES.join("\t"));
        for (key, scores, raw) in &self.rows {
            out.push_str(key);
            match raw {
                Some(raw) => raw.iter().for_each(|r| {
                    out.push('\t');
                    out.push_str(r);
                }),
                None => scores.to_array().iter().for_each(|v| {
                    out.push('\t');
                    out.push_str(&v.to_string());
                }),
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_tsv())
    }
}

/// Where emotion scores come from during featurization.
#[derive(Debug, Clone)]
pub enum EmotionProvider {
    Lexicon(EmotionLexicon),
    Precomputed {
        store: PrecomputedEmotionStore,
        fallback: Option<EmotionLexicon>,
    },
}

impl EmotionProvider {
    /// Stable identifier recorded in feature schemas.
    pub fn id(&self) -> &'static str {
        match self {
            EmotionProvider::Lexicon(_) => "lexicon",
            EmotionProvider::Precomputed { fallback: None, .. } => "precomputed",
            EmotionProvider::Precomputed {
                fallback: Some(_), ..
            } => "precomputed+lexicon",
        }
    }

    pub fn get_scores(&self, segment: &Segment) -> Result<EmotionScores> {
        match self {
            EmotionProvider::Lexicon(lex) => Ok(score_with_lexicon(&segment.tokens, lex)),
            EmotionProvider::Precomputed { store, fallback } => {
                let key = segment.key.to_string();
                match (store.get(&key), fallback) {
                    (Some(s), _) => Ok(s),
                    (None, Some(lex)) => {
                        log::debug!("no precomputed scores for {key}, using lexicon");
                        Ok(score_with_lexicon(&segment.tokens, lex))
                    }
                    (None, None) => Err(Error::MissingKey(key)),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SegmentKey;
    use proptest::prelude::*;

    fn s(v: [f64; 5]) -> EmotionScores {
        EmotionScores::new(v).unwrap()
    }

    fn toks(t: &[&str]) -> Vec<String> {
        t.iter().map(|x| x.to_string()).collect()
    }

    fn war_peace() -> EmotionLexicon {
        EmotionLexicon::from_entries([
            ("war", s([0.3, 0.1, 0.6, 0.7, 0.5])),
            ("peace", s([0.7, 0.7, 0.1, 0.1, 0.1])),
        ])
    }

    /// Column-by-column mean written out the way one would in a spreadsheet.
    fn spreadsheet_mean(rows: &[[f64; 5]]) -> [f64; 5] {
        let mut out = [0.0; 5];
        for col in 0..5 {
            let column: Vec<f64> = rows.iter().map(|r| r[col]).collect();
            out[col] = column.iter().sum::<f64>() / column.len() as f64;
        }
        out
    }

    #[test]
    fn no_match_is_neutral() {
        assert_eq!(score_with_lexicon(&[], &war_peace()), NEUTRAL);
        assert_eq!(NEUTRAL.to_array(), [0.5, 0.2, 0.2, 0.2, 0.2]);
    }

    #[test]
    fn lexicon_mean() {
        let got = score_with_lexicon(&toks(&["war", "peace"]), &war_peace()).to_array();
        let oracle = spreadsheet_mean(&[[0.3, 0.1, 0.6, 0.7, 0.5], [0.7, 0.7, 0.1, 0.1, 0.1]]);
        for ((g, o), frozen) in got.iter().zip(oracle).zip([0.5, 0.4, 0.35, 0.4, 0.3]) {
            assert!((g - o).abs() < 1e-12);
            assert!((g - frozen).abs() < 1e-12);
        }
        let single = score_with_lexicon(&toks(&["war", "xyzzy"]), &war_peace());
        assert_eq!(single.to_array(), [0.3, 0.1, 0.6, 0.7, 0.5]);
    }

    #[test]
    fn scores_reject_out_of_range_and_nan() {
        assert!(EmotionScores::new([1.5, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(EmotionScores::new([0.5, f64::NAN, 0.0, 0.0, 0.0]).is_err());
        assert!(EmotionScores::new([0.0, 1.0, 0.0, 0.0, 0.0]).is_ok());
    }

    #[test]
    fn precomputed_store_parsing() {
        let p = Path::new("scores.tsv");
        let header = "key\tvalence\tjoy\tanger\tfear\tsadness\n";
        let store = PrecomputedEmotionStore::parse(
            p,
            &format!("{header}t1:0:24\t0.672\t0.592\t0.264\t0.201\t0.286\n"),
        )
        .unwrap();
        assert_eq!(
            store.get("t1:0:24").unwrap().to_array(),
            [0.672, 0.592, 0.264, 0.201, 0.286]
        );
        assert!(PrecomputedEmotionStore::parse(p, header)
            .unwrap()
            .is_empty());
        assert!(matches!(
            PrecomputedEmotionStore::parse(p, &format!("{header}k\t1.5\t0\t0\t0\t0\n")),
            Err(Error::OutOfRange { .. })
        ));
        assert!(matches!(
            PrecomputedEmotionStore::parse(
                p,
                &format!("{header}k\t0\t0\t0\t0\t0\nk\t0\t0\t0\t0\t0\n")
            ),
            Err(Error::DuplicateKey(_))
        ));
        assert!(matches!(
            PrecomputedEmotionStore::parse(p, &format!("{header}k\t0\t0\t0\n")),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(PrecomputedEmotionStore::parse(p, "").is_err());
    }

    #[test]
    fn export_keeps_decimal_text() {
        let text = "key\tvalence\tjoy\tanger\tfear\tsadness\nk\t0.50\t1\t0.2000\t0e0\t.3\n";
        let store = PrecomputedEmotionStore::parse(Path::new("x"), text).unwrap();
        assert_eq!(store.to_tsv(), text);
    }

    fn segment(key: &str, tokens: &[&str]) -> Segment {
        Segment {
            key: key.parse::<SegmentKey>().unwrap(),
            surface: tokens.join(" "),
            tokens: toks(tokens),
            left_context: vec![],
            right_context: vec![],
            gold: None,
        }
    }

    #[test]
    fn provider_lookup_and_fallback() {
        let mut store = PrecomputedEmotionStore::new();
        let stored = s([0.1, 0.2, 0.3, 0.4, 0.5]);
        store.insert("1:0:3", stored).unwrap();
        let seg = segment("1:0:3", &["war"]);
        let missing = segment("1:4:9", &["war"]);

        let strict = EmotionProvider::Precomputed {
            store: store.clone(),
            fallback: None,
        };
        assert_eq!(strict.get_scores(&seg).unwrap(), stored);
        assert!(matches!(
            strict.get_scores(&missing),
            Err(Error::MissingKey(_))
        ));

        let lenient = EmotionProvider::Precomputed {
            store,
            fallback: Some(war_peace()),
        };
        assert_eq!(
            lenient.get_scores(&missing).unwrap().to_array(),
            [0.3, 0.1, 0.6, 0.7, 0.5]
        );
        assert_eq!(
            EmotionProvider::Lexicon(war_peace())
                .get_scores(&seg)
                .unwrap()
                .anger,
            0.6
        );
    }

    fn arb_scores() -> impl Strategy<Value = EmotionScores> {
        proptest::array::uniform5(0.0f64..=1.0).prop_map(|a| EmotionScores::new(a).unwrap())
    }

    proptest! {
        #[test]
        fn lexicon_scores_stay_in_unit_cube(
            lex in proptest::collection::vec(("[a-e]{1,2}", arb_scores()), 0..20),
            tokens in proptest::collection::vec("[a-e]{1,2}", 0..30),
        ) {
            let lex = EmotionLexicon::from_entries(lex);
            let got = score_with_lexicon(&tokens, &lex);
            prop_assert!(got.to_array().iter().all(|v| (0.0..=1.0).contains(v)));
        }

        #[test]
        fn lexicon_mean_ignores_order_and_uniform_duplication(
            lex in proptest::collection::vec(("[a-d]", arb_scores()), 1..8),
            tokens in proptest::collection::vec("[a-f]", 1..20),
            k in 2usize..4,
        ) {
            let lex = EmotionLexicon::from_entries(lex);
            let base = score_with_lexicon(&tokens, &lex).to_array();
            let mut rev = tokens.clone();
            rev.reverse();
            let dup: Vec<String> = (0..k).flat_map(|_| tokens.clone()).collect();
            for other in [score_with_lexicon(&rev, &lex), score_with_lexicon(&dup, &lex)] {
                for (a, b) in base.iter().zip(other.to_array()) {
                    prop_assert!((a - b).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn store_round_trips(values in proptest::collection::vec(arb_scores(), 0..20)) {
            let mut store = PrecomputedEmotionStore::new();
            for (i, v) in values.iter().enumerate() {
                store.insert(format!("{i}:0:1"), *v).unwrap();
            }
            let text = store.to_tsv();
            let back = PrecomputedEmotionStore::parse(Path::new("rt"), &text).unwrap();
            for (i, v) in values.iter().enumerate() {
                prop_assert_eq!(back.get(&format!("{i}:0:1")).unwrap(), *v);
            }
            prop_assert_eq!(back.to_tsv(), text);
        }
    }
}
