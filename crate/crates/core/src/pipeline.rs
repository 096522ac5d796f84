//! Glue between a feature cache, training and evaluation.

use crate::corpus::{SegmentKey, SpanAnnotation};
use crate::error::Result;
use crate::eval::span_predictions;
use crate::features::{Condition, FeatureSchema, FeatureSet};
use crate::net::{train, train_logistic_baseline, ModelConfig, TrainedModel, TrainingLog};

/// A model trained for one condition together with its input schema.
#[derive(Debug, Clone)]
pub struct TrainedRun {
    pub condition: Condition,
    pub schema: FeatureSchema,
    pub model: TrainedModel,
    pub log: TrainingLog,
}

/// Trains `condition` on every bundle of `set`; dimensions come from the cache.
pub fn train_condition(
    set: &FeatureSet,
    condition: Condition,
    base: &ModelConfig,
) -> Result<TrainedRun> {
    let schema = set.schema(condition)?;
    let cfg = schema.model_config(base);
    let examples = schema.examples(&set.bundles)?;
    let (model, log) = if condition.is_logistic() {
        let out = train_logistic_baseline(&examples, &cfg)?;
        (TrainedModel::Logistic(out.model), out.log)
    } else {
        let out = train(&examples, &cfg)?;
        (TrainedModel::Fusion(out.model), out.log)
    };
    Ok(TrainedRun {
        condition,
        schema,
        model,
        log,
    })
}

/// Gold annotation rows recorded in a feature cache.
pub fn gold_rows(set: &FeatureSet) -> Result<Vec<SpanAnnotation>> {
    let mut out = Vec::new();
    for b in &set.bundles {
        let key: SegmentKey = b.key.parse()?;
        out.extend(b.labels.iter().map(|&technique| SpanAnnotation {
            article_id: key.article_id,
            technique,
            span_start: key.span_start,
            span_end: key.span_end,
        }));
    }
    Ok(out)
}

/// One prediction row per gold row of every bundle, after checking that the
/// cache can feed a model trained on `schema`.
pub fn predict_set(
    model: &TrainedModel,
    schema: &FeatureSchema,
    set: &FeatureSet,
) -> Result<Vec<SpanAnnotation>> {
    let available = set.schema(schema.condition).map_err(|_| {
        let m = &set.manifest;
        crate::Error::Schema(format!(
            "checkpoint expects {}; feature cache provides d_embed={} d_aux={} ({} categories, context {})",
            schema.describe(),
            m.embedding_dim,
            crate::emotion::EMOTION_DIMS + m.categories.len(),
            m.categories.len(),
            m.has_context
        ))
    })?;
    schema.check_compatible(&available)?;
    let mut out = Vec::new();
    for b in &set.bundles {
        let (embed, aux) = schema.inputs(b)?;
        let pred = model.predict(&embed, &aux)?;
        out.extend(span_predictions(
            b.key.parse()?,
            &pred,
            b.labels.len().max(1),
        ));
    }
    Ok(out)
}
