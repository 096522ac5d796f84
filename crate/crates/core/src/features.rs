//! Feature bundles per segment, the on-disk feature cache, and the mapping
//! from ablation conditions to model inputs.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::category::{category_features, CategoryLexicon};
use crate::corpus::{LabeledSpan, TechniqueLabel};
use crate::embeddings::EmbeddingProvider;
use crate::emotion::{EmotionProvider, EMOTION_DIMS};
use crate::error::{read_text, write_text, Error, Result};
use crate::net::{Example, ModelConfig};

pub const CACHE_FORMAT: &str = "proplab-features";
pub const CACHE_VERSION: u32 = 1;

/// Feature combinations compared in the ablation table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Condition {
    EmbedOnly,
    EmotionOnly,
    EmbedEmotion,
    EmbedEmotionCategory,
    EmbedEmotionContext,
    LogisticBaseline,
}

impl Condition {
    pub const ALL: [Condition; 6] = [
        Condition::LogisticBaseline,
        Condition::EmbedOnly,
        Condition::EmotionOnly,
        Condition::EmbedEmotion,
        Condition::EmbedEmotionCategory,
        Condition::EmbedEmotionContext,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Condition::EmbedOnly => "embed-only",
            Condition::EmotionOnly => "emotion-only",
            Condition::EmbedEmotion => "embed+emotion",
            Condition::EmbedEmotionCategory => "embed+emotion+category",
            Condition::EmbedEmotionContext => "embed+emotion+context",
            Condition::LogisticBaseline => "logistic-baseline",
        }
    }

    pub fn uses_embedding(self) -> bool {
        !matches!(self, Condition::EmotionOnly)
    }

    pub fn uses_emotion(self) -> bool {
        !matches!(self, Condition::EmbedOnly)
    }

    pub fn uses_category(self) -> bool {
        matches!(self, Condition::EmbedEmotionCategory)
    }

    pub fn uses_context(self) -> bool {
        matches!(self, Condition::EmbedEmotionContext)
    }

    pub fn is_logistic(self) -> bool {
        matches!(self, Condition::LogisticBaseline)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Condition::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Condition::ALL.iter().map(|c| c.name()).collect();
                Error::Config(format!(
                    "unknown condition {s:?} (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

impl From<Condition> for String {
    fn from(c: Condition) -> String {
        c.name().to_string()
    }
}

impl TryFrom<String> for Condition {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Provenance of a feature cache.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheManifest {
    pub format: String,
    pub version: u32,
    pub embedding_provider: String,
    pub embedding_dim: usize,
    pub has_context: bool,
    pub emotion_provider: String,
    pub categories: Vec<String>,
}

/// All feature blocks for one span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBundle {
    pub key: String,
    /// Gold techniques, one per annotation row of this span.
    pub labels: Vec<TechniqueLabel>,
    pub embed: Vec<f64>,
    pub embed_context: Option<Vec<f64>>,
    pub emotion: Vec<f64>,
    pub category: Vec<f64>,
}

/// What a trained model expects as input; stored in checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub condition: Condition,
    pub embedding_provider: Option<String>,
    pub d_embed: usize,
    pub context: bool,
    pub emotion_provider: Option<String>,
    pub category_dims: usize,
    pub d_aux: usize,
}

impl FeatureSchema {
    pub fn for_condition(
        condition: Condition,
        embedding_provider: &str,
        embedding_dim: usize,
        emotion_provider: Option<&str>,
        category_dims: usize,
    ) -> Result<Self> {
        let emotion_provider = if condition.uses_emotion() {
            Some(
                emotion_provider
                    .ok_or_else(|| Error::Schema(format!("{condition} needs emotion features")))?
                    .to_string(),
            )
        } else {
            None
        };
        if condition.uses_category() && category_dims == 0 {
            return Err(Error::Schema(format!(
                "{condition} needs a category dictionary"
            )));
        }
        let category_dims = if condition.uses_category() {
            category_dims
        } else {
            0
        };
        let d_aux = if condition.uses_emotion() {
            EMOTION_DIMS
        } else {
            0
        } + category_dims;
        Ok(FeatureSchema {
            condition,
            embedding_provider: condition
                .uses_embedding()
                .then(|| embedding_provider.to_string()),
            d_embed: if condition.uses_embedding() {
                embedding_dim
            } else {
                0
            },
            context: condition.uses_context(),
            emotion_provider,
            category_dims,
            d_aux,
        })
    }

    pub fn from_manifest(condition: Condition, manifest: &CacheManifest) -> Result<Self> {
        if condition.uses_context() && !manifest.has_context {
            return Err(Error::Schema(format!(
                "{condition} needs context embeddings but the feature cache has none"
            )));
        }
        Self::for_condition(
            condition,
            &manifest.embedding_provider,
            manifest.embedding_dim,
            Some(&manifest.emotion_provider),
            manifest.categories.len(),
        )
    }

    /// Fails with a readable message when `other` cannot feed a model trained on `self`.
    pub fn check_compatible(&self, other: &FeatureSchema) -> Result<()> {
        let mut problems = Vec::new();
        if self.condition != other.condition {
            problems.push(format!(
                "condition {} vs {}",
                self.condition, other.condition
            ));
        }
        if self.d_embed != other.d_embed {
            problems.push(format!("d_embed {} vs {}", self.d_embed, other.d_embed));
        }
        if self.d_aux != other.d_aux {
            problems.push(format!("d_aux {} vs {}", self.d_aux, other.d_aux));
        }
        if self.embedding_provider != other.embedding_provider {
            problems.push(format!(
                "embedding provider {:?} vs {:?}",
                self.embedding_provider, other.embedding_provider
            ));
        }
        if self.emotion_provider.is_some() != other.emotion_provider.is_some() {
            problems.push("emotion block presence differs".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Schema(format!(
                "checkpoint expects {}, features provide otherwise: {}",
                self.describe(),
                problems.join("; ")
            )))
        }
    }

    pub fn describe(&self) -> String {
        format!(
            "condition={} d_embed={} d_aux={}",
            self.condition, self.d_embed, self.d_aux
        )
    }

    /// Model dimensions for this schema on top of `base`.
    pub fn model_config(&self, base: &ModelConfig) -> ModelConfig {
        ModelConfig {
            d_embed: self.d_embed,
            d_aux: self.d_aux,
            n_classes: TechniqueLabel::COUNT,
            ..base.clone()
        }
    }

    /// `(x_embed, x_aux)` for one bundle.
    pub fn inputs(&self, bundle: &FeatureBundle) -> Result<(Vec<f64>, Vec<f64>)> {
        let embed = if self.d_embed == 0 {
            Vec::new()
        } else if self.context {
            bundle
                .embed_context
                .clone()
                .ok_or_else(|| Error::Schema(format!("{} has no context embedding", bundle.key)))?
        } else {
            bundle.embed.clone()
        };
        let mut aux = Vec::with_capacity(self.d_aux);
        if self.emotion_provider.is_some() {
            aux.extend_from_slice(&bundle.emotion);
        }
        if self.category_dims > 0 {
            aux.extend_from_slice(&bundle.category);
        }
        if embed.len() != self.d_embed || aux.len() != self.d_aux {
            return Err(Error::Schema(format!(
                "{}: features are {}+{} wide, schema expects {}+{}",
                bundle.key,
                embed.len(),
                aux.len(),
                self.d_embed,
                self.d_aux
            )));
        }
        Ok((embed, aux))
    }

    /// One training example per (span, gold label) pair.
    pub fn examples(&self, bundles: &[FeatureBundle]) -> Result<Vec<Example>> {
        let mut out = Vec::new();
        for b in bundles {
            let (embed, aux) = self.inputs(b)?;
            for label in &b.labels {
                out.push(Example {
                    embed: embed.clone(),
                    aux: aux.clone(),
                    label: label.index(),
                });
            }
        }
        Ok(out)
    }
}

/// A feature cache: manifest plus bundles in span order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub manifest: CacheManifest,
    pub bundles: Vec<FeatureBundle>,
}

impl FeatureSet {
    pub fn schema(&self, condition: Condition) -> Result<FeatureSchema> {
        FeatureSchema::from_manifest(condition, &self.manifest)
    }

    /// JSON lines: manifest first, then one bundle per line.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out =
            serde_json::to_string(&self.manifest).map_err(|e| Error::Config(e.to_string()))?;
        out.push('\n');
        for b in &self.bundles {
            out.push_str(&serde_json::to_string(b).map_err(|e| Error::Config(e.to_string()))?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines
            .next()
            .ok_or_else(|| Error::parse(path, 1, "empty feature cache"))?;
        let manifest: CacheManifest =
            serde_json::from_str(first).map_err(|e| Error::parse(path, 1, e.to_string()))?;
        if manifest.format != CACHE_FORMAT || manifest.version != CACHE_VERSION {
            return Err(Error::parse(
                path,
                1,
                format!(
                    "unsupported feature cache {} v{}",
                    manifest.format, manifest.version
                ),
            ));
        }
        let mut bundles = Vec::new();
        for (i, line) in lines {
            let b: FeatureBundle =
                serde_json::from_str(line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
            if b.embed.len() != manifest.embedding_dim
                || b.emotion.len() != EMOTION_DIMS
                || b.category.len() != manifest.categories.len()
                || b.embed_context.is_some() != manifest.has_context
            {
                return Err(Error::parse(
                    path,
                    i + 1,
                    "bundle does not match cache manifest",
                ));
            }
            bundles.push(b);
        }
        Ok(FeatureSet { manifest, bundles })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(path, &read_text(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_jsonl()?)
    }
}

/// Computes feature bundles from segments with the configured providers.
#[derive(Debug, Clone)]
pub struct Featurizer {
    pub embedding: EmbeddingProvider,
    pub emotion: EmotionProvider,
    pub category: Option<CategoryLexicon>,
    pub with_context: bool,
}

impl Featurizer {
    pub fn manifest(&self) -> CacheManifest {
        CacheManifest {
            format: CACHE_FORMAT.to_string(),
            version: CACHE_VERSION,
            embedding_provider: self.embedding.id().to_string(),
            embedding_dim: self.embedding.dim(),
            has_context: self.with_context,
            emotion_provider: self.emotion.id().to_string(),
            categories: self
                .category
                .as_ref()
                .map(|c| c.categories().to_vec())
                .unwrap_or_default(),
        }
    }

    pub fn bundle(&self, span: &LabeledSpan) -> Result<FeatureBundle> {
        let seg = &span.segment;
        // Emotion and category blocks see the bare segment; only the
        // embedding may include surrounding context.
        let emotion = self.emotion.get_scores(seg)?.to_array().to_vec();
        let category = self
            .category
            .as_ref()
            .map(|lex| category_features(&seg.tokens, lex))
            .unwrap_or_default();
        Ok(FeatureBundle {
            key: seg.key.to_string(),
            labels: span.labels.clone(),
            embed: self.embedding.get_embedding(seg, false)?,
            embed_context: if self.with_context {
                Some(self.embedding.get_embedding(seg, true)?)
            } else {
                None
            },
            emotion,
            category,
        })
    }

    /// Featurizes spans in parallel chunks, keeping input order.
    pub fn featurize(&self, spans: &[LabeledSpan]) -> Result<FeatureSet> {
        let workers = std::thread::available_parallelism()
            .map_or(1, |n| n.get())
            .min(8);
        let chunk = spans.len().div_ceil(workers).max(1);
        let parts: Vec<Result<Vec<FeatureBundle>>> = std::thread::scope(|scope| {
            let handles: Vec<_> = spans
                .chunks(chunk)
                .map(|part| scope.spawn(move || part.iter().map(|s| self.bundle(s)).collect()))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("featurization worker panicked"))
                .collect()
        });
        let mut bundles = Vec::with_capacity(spans.len());
        for part in parts {
            bundles.extend(part?);
        }
        Ok(FeatureSet {
            manifest: self.manifest(),
            bundles,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{extract_labeled_spans, Article, SpanAnnotation};
    use crate::emotion::EmotionLexicon;

    fn spans() -> Vec<LabeledSpan> {
        let arts = vec![Article {
            id: 1,
            text: "we must stop the invaders now before the war comes home".into(),
        }];
        let anns = vec![
            SpanAnnotation {
                article_id: 1,
                technique: TechniqueLabel::AppealToFearPrejudice,
                span_start: 8,
                span_end: 25,
            },
            SpanAnnotation {
                article_id: 1,
                technique: TechniqueLabel::LoadedLanguage,
                span_start: 8,
                span_end: 25,
            },
        ];
        extract_labeled_spans(&arts, &anns, 3).unwrap()
    }

    fn featurizer() -> Featurizer {
        Featurizer {
            embedding: EmbeddingProvider::Hash { dim: 32 },
            emotion: EmotionProvider::Lexicon(EmotionLexicon::default()),
            category: None,
            with_context: true,
        }
    }

    #[test]
    fn conditions_parse_from_names() {
        for c in Condition::ALL {
            assert_eq!(c.name().parse::<Condition>().unwrap(), c);
        }
        assert!("bert-only".parse::<Condition>().is_err());
    }

    #[test]
    fn cache_round_trip_is_byte_identical() {
        let set = featurizer().featurize(&spans()).unwrap();
        let text = set.to_jsonl().unwrap();
        let back = FeatureSet::parse(Path::new("c"), &text).unwrap();
        assert_eq!(back, set);
        assert_eq!(back.to_jsonl().unwrap(), text);
    }

    #[test]
    fn multi_label_span_expands_to_examples() {
        let set = featurizer().featurize(&spans()).unwrap();
        assert_eq!(set.bundles.len(), 1);
        let schema = set.schema(Condition::EmbedEmotion).unwrap();
        let ex = schema.examples(&set.bundles).unwrap();
        assert_eq!(ex.len(), 2);
        assert_eq!((ex[0].embed.len(), ex[0].aux.len()), (32, 5));
    }

    #[test]
    fn schema_widths_per_condition() {
        let set = featurizer().featurize(&spans()).unwrap();
        let widths = |c: Condition| set.schema(c).map(|s| (s.d_embed, s.d_aux));
        assert_eq!(widths(Condition::EmbedOnly).unwrap(), (32, 0));
        assert_eq!(widths(Condition::EmotionOnly).unwrap(), (0, 5));
        assert_eq!(widths(Condition::EmbedEmotionContext).unwrap(), (32, 5));
        assert!(widths(Condition::EmbedEmotionCategory).is_err());
        let ctx = set.schema(Condition::EmbedEmotionContext).unwrap();
        let plain = set.schema(Condition::EmbedEmotion).unwrap();
        assert_ne!(
            ctx.inputs(&set.bundles[0]).unwrap().0,
            plain.inputs(&set.bundles[0]).unwrap().0
        );
    }

    #[test]
    fn incompatible_schema_is_reported() {
        let a = FeatureSchema::for_condition(
            Condition::EmbedEmotion,
            "hash-fnv1a",
            32,
            Some("lexicon"),
            0,
        )
        .unwrap();
        let b = FeatureSchema::for_condition(
            Condition::EmbedEmotionCategory,
            "hash-fnv1a",
            32,
            Some("lexicon"),
            73,
        )
        .unwrap();
        assert_eq!(b.d_aux, 78);
        let err = a.check_compatible(&b).unwrap_err().to_string();
        assert!(err.contains("d_aux 5 vs 78"), "{err}");
        assert!(a.check_compatible(&a.clone()).is_ok());
    }
}
