//! Seeded synthetic corpora with class-marker tokens.
//!
//! Every span carries marker words unique to its technique, shared filler
//! words and a few emotion-lexicon terms. One technique can be made to draw
//! its emotion terms from a high-anger, low-valence pool, which gives the
//! correlation analysis a known sign pattern.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::corpus::{format_annotations, Article, SpanAnnotation, TechniqueLabel};
use crate::emotion::{EmotionLexicon, EmotionScores, DIMENSION_NAMES};
use crate::error::{write_text, Error, Result};
use crate::net::XorShiftStar;

const FILLER: [&str; 40] = [
    "the",
    "a",
    "people",
    "country",
    "said",
    "will",
    "they",
    "we",
    "now",
    "today",
    "government",
    "never",
    "more",
    "about",
    "every",
    "after",
    "report",
    "year",
    "many",
    "those",
    "state",
    "city",
    "world",
    "news",
    "time",
    "way",
    "just",
    "know",
    "must",
    "leaders",
    "media",
    "week",
    "official",
    "children",
    "nation",
    "group",
    "policy",
    "plan",
    "life",
    "home",
];

/// valence, joy, anger, fear, sadness
const ANGRY_TERMS: [(&str, [f64; 5]); 6] = [
    ("fury", [0.12, 0.05, 0.91, 0.52, 0.40]),
    ("rage", [0.10, 0.04, 0.94, 0.48, 0.37]),
    ("outrage", [0.15, 0.06, 0.86, 0.44, 0.41]),
    ("traitors", [0.09, 0.03, 0.88, 0.57, 0.45]),
    ("disgrace", [0.14, 0.05, 0.79, 0.39, 0.52]),
    ("hatred", [0.08, 0.02, 0.90, 0.60, 0.49]),
];

const CALM_TERMS: [(&str, [f64; 5]); 8] = [
    ("hope", [0.81, 0.63, 0.12, 0.20, 0.18]),
    ("together", [0.74, 0.55, 0.10, 0.15, 0.14]),
    ("proud", [0.79, 0.66, 0.14, 0.12, 0.11]),
    ("safe", [0.70, 0.45, 0.09, 0.25, 0.16]),
    ("fair", [0.66, 0.40, 0.17, 0.19, 0.20]),
    ("statement", [0.50, 0.22, 0.21, 0.22, 0.21]),
    ("council", [0.52, 0.24, 0.19, 0.20, 0.19]),
    ("announced", [0.55, 0.28, 0.18, 0.21, 0.18]),
];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub per_class: usize,
    pub segments_per_article: usize,
    /// Distinct marker words per class.
    pub markers_per_class: usize,
    /// Distinct markers drawn into each span.
    pub markers_per_span: usize,
    pub filler_tokens: usize,
    pub emotion_tokens: usize,
    /// Technique whose spans draw from the angry pool; `None` for all calm.
    pub angry_class: Option<TechniqueLabel>,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            per_class: 200,
            segments_per_article: 20,
            markers_per_class: 4,
            markers_per_span: 3,
            filler_tokens: 4,
            emotion_tokens: 2,
            angry_class: Some(TechniqueLabel::LoadedLanguage),
            seed: 2020,
        }
    }
}

/// Marker word `k` of a class, e.g. `loadedlangua2`.
pub fn marker(t: TechniqueLabel, k: usize) -> String {
    let stem: String = t
        .name()
        .chars()
        .filter(|c| c.is_ascii_alphabetic())
        .take(12)
        .collect();
    format!("{stem}{k}")
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub articles: Vec<Article>,
    pub annotations: Vec<SpanAnnotation>,
    pub lexicon: EmotionLexicon,
}

/// Locations written by [`SyntheticCorpus::write`].
#[derive(Debug, Clone)]
pub struct SyntheticPaths {
    pub articles: PathBuf,
    pub labels: PathBuf,
    pub lexicon: PathBuf,
}

pub fn lexicon_terms() -> impl Iterator<Item = (&'static str, [f64; 5])> {
    ANGRY_TERMS.iter().chain(CALM_TERMS.iter()).copied()
}

fn pick<'a>(rng: &mut XorShiftStar, items: &'a [&'a str]) -> &'a str {
    items[rng.below(items.len())]
}

impl SyntheticCorpus {
    pub fn generate(spec: &SyntheticSpec) -> Result<Self> {
        if spec.per_class == 0 || spec.segments_per_article == 0 {
            return Err(Error::Config(
                "per_class and segments_per_article must be positive".into(),
            ));
        }
        if spec.markers_per_span == 0 || spec.markers_per_span > spec.markers_per_class {
            return Err(Error::Config(
                "markers_per_span must be in 1..=markers_per_class".into(),
            ));
        }
        let mut rng = XorShiftStar::new(spec.seed);
        let mut order: Vec<TechniqueLabel> = TechniqueLabel::ALL
            .iter()
            .flat_map(|&t| std::iter::repeat_n(t, spec.per_class))
            .collect();
        rng.shuffle(&mut order);

        let angry: Vec<&str> = ANGRY_TERMS.iter().map(|(w, _)| *w).collect();
        let calm: Vec<&str> = CALM_TERMS.iter().map(|(w, _)| *w).collect();
        let mut articles = Vec::new();
        let mut annotations = Vec::new();
        for (a, chunk) in order.chunks(spec.segments_per_article).enumerate() {
            let id = 100_000 + a as u64;
            let mut text = String::new();
            let mut chars = 0usize;
            for &t in chunk {
                let intro = format!("{} {}: ", pick(&mut rng, &FILLER), pick(&mut rng, &FILLER));
                let mut words: Vec<String> = Vec::new();
                let mut ks: Vec<usize> = (0..spec.markers_per_class).collect();
                rng.shuffle(&mut ks);
                words.extend(ks[..spec.markers_per_span].iter().map(|&k| marker(t, k)));
                for _ in 0..spec.filler_tokens {
                    words.push(pick(&mut rng, &FILLER).to_string());
                }
                let pool = if spec.angry_class == Some(t) {
                    &angry
                } else {
                    &calm
                };
                for _ in 0..spec.emotion_tokens {
                    words.push(pick(&mut rng, pool).to_string());
                }
                rng.shuffle(&mut words);
                let span = words.join(" ");
                let start = chars + intro.chars().count();
                let end = start + span.chars().count();
                let _ = write!(text, "{intro}{span}. ");
                chars = end + 2;
                annotations.push(SpanAnnotation {
                    article_id: id,
                    technique: t,
                    span_start: start,
                    span_end: end,
                });
            }
            articles.push(Article {
                id,
                text: text.trim_end().to_string(),
            });
        }
        let lexicon = EmotionLexicon::from_entries(lexicon_terms().map(|(w, v)| {
            (
                w,
                EmotionScores::new(v).expect("fixture scores are in range"),
            )
        }));
        Ok(SyntheticCorpus {
            articles,
            annotations,
            lexicon,
        })
    }

    /// The lexicon in its TSV file format.
    pub fn lexicon_tsv() -> String {
        let mut out = format!("term\t{}\n", DIMENSION_NAMES.join("\t"));
        for (w, v) in lexicon_terms() {
            let vals: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "{w}\t{}", vals.join("\t"));
        }
        out
    }

    /// Writes `articles/article<id>.txt`, `labels.tsv` and `lexicon.tsv` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<SyntheticPaths> {
        let articles = dir.join("articles");
        std::fs::create_dir_all(&articles).map_err(|e| Error::io(&articles, e))?;
        for a in &self.articles {
            write_text(&articles.join(format!("article{}.txt", a.id)), &a.text)?;
        }
        let labels = dir.join("labels.tsv");
        write_text(&labels, &format_annotations(&self.annotations))?;
        let lexicon = dir.join("lexicon.tsv");
        write_text(&lexicon, &Self::lexicon_tsv())?;
        Ok(SyntheticPaths {
            articles,
            labels,
            lexicon,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{extract_labeled_spans, load_annotations, load_corpus};

    fn small() -> SyntheticSpec {
        SyntheticSpec {
            per_class: 5,
            segments_per_article: 7,
            ..SyntheticSpec::default()
        }
    }

    #[test]
    fn spans_contain_their_markers() {
        let c = SyntheticCorpus::generate(&small()).unwrap();
        assert_eq!(c.annotations.len(), 70);
        let spans = extract_labeled_spans(&c.articles, &c.annotations, 3).unwrap();
        for s in &spans {
            let t = s.labels[0];
            let markers: Vec<String> = (0..4).map(|k| marker(t, k)).collect();
            let hits = s
                .segment
                .tokens
                .iter()
                .filter(|w| markers.contains(w))
                .count();
            assert_eq!(hits, 3, "{:?}", s.segment.tokens);
            assert_eq!(s.segment.tokens.len(), 3 + 4 + 2);
        }
    }

    #[test]
    fn markers_are_distinct_tokens() {
        let mut all: Vec<String> = TechniqueLabel::ALL
            .iter()
            .flat_map(|&t| (0..4).map(move |k| marker(t, k)))
            .collect();
        assert!(all
            .iter()
            .all(|m| crate::corpus::tokenize(m) == [m.clone()]));
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 56);
    }

    #[test]
    fn generation_is_seeded() {
        let a = SyntheticCorpus::generate(&small()).unwrap();
        let b = SyntheticCorpus::generate(&small()).unwrap();
        assert_eq!(a.articles, b.articles);
        let c = SyntheticCorpus::generate(&SyntheticSpec { seed: 1, ..small() }).unwrap();
        assert_ne!(a.articles, c.articles);
    }

    #[test]
    fn written_files_load_back() {
        let c = SyntheticCorpus::generate(&small()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = c.write(dir.path()).unwrap();
        assert_eq!(load_corpus(&paths.articles).unwrap(), c.articles);
        assert_eq!(load_annotations(&paths.labels).unwrap(), c.annotations);
        assert_eq!(
            EmotionLexicon::load(&paths.lexicon).unwrap().len(),
            c.lexicon.len()
        );
    }
}
