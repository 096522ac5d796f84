//! Versioned JSON checkpoints.
//!
//! Weights are written as nested arrays of decimals with 17 significant
//! digits so that loading reproduces every `f64` exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use super::adam::AdamState;
use super::dense::Dense;
use super::fusion::FusionParameters;
use super::logistic::LogisticParameters;
use super::{Classifier, ModelConfig, Prediction};
use crate::corpus::TechniqueLabel;
use crate::error::{read_text, write_text, Error, Result};
use crate::features::FeatureSchema;

pub const CHECKPOINT_FORMAT: &str = "proplab-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

/// A trained classifier of either architecture.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Fusion(FusionParameters),
    Logistic(LogisticParameters),
}

impl TrainedModel {
    pub fn config(&self) -> &ModelConfig {
        match self {
            TrainedModel::Fusion(p) => &p.config,
            TrainedModel::Logistic(p) => &p.config,
        }
    }

    pub fn predict(&self, x_embed: &[f64], x_aux: &[f64]) -> Result<Prediction> {
        match self {
            TrainedModel::Fusion(p) => p.predict(x_embed, x_aux),
            TrainedModel::Logistic(p) => p.predict(x_embed, x_aux),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            TrainedModel::Fusion(_) => "fusion",
            TrainedModel::Logistic(_) => "logistic",
        }
    }

    fn named_layers(&self) -> Vec<(&'static str, &Dense)> {
        match self {
            TrainedModel::Fusion(p) => vec![
                ("projection", &p.projection),
                ("hidden", &p.hidden),
                ("output", &p.output),
            ],
            TrainedModel::Logistic(p) => vec![("output", &p.output)],
        }
    }

    fn adam_step(&self) -> u64 {
        match self {
            TrainedModel::Fusion(p) => p.adam.step,
            TrainedModel::Logistic(p) => p.adam.step,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: TrainedModel,
    pub schema: FeatureSchema,
}

pub fn class_names(n_classes: usize) -> Vec<String> {
    if n_classes == TechniqueLabel::COUNT {
        TechniqueLabel::ALL
            .iter()
            .map(|t| t.name().to_string())
            .collect()
    } else {
        (0..n_classes).map(|i| format!("class{i}")).collect()
    }
}

#[derive(Serialize)]
struct LayerOut<'a> {
    name: &'a str,
    rows: usize,
    cols: usize,
    weight: Box<RawValue>,
    bias: Box<RawValue>,
}

#[derive(Serialize)]
struct CheckpointOut<'a> {
    format: &'a str,
    version: u32,
    kind: &'a str,
    config: &'a ModelConfig,
    classes: Vec<String>,
    schema: &'a FeatureSchema,
    adam_step: u64,
    layers: Vec<LayerOut<'a>>,
}

#[derive(Deserialize)]
struct LayerIn {
    name: String,
    rows: usize,
    cols: usize,
    weight: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

#[derive(Deserialize)]
struct CheckpointIn {
    format: String,
    version: u32,
    kind: String,
    config: ModelConfig,
    classes: Vec<String>,
    schema: FeatureSchema,
    adam_step: u64,
    layers: Vec<LayerIn>,
}

fn decimal_array(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.16e}")).collect();
    format!("[{}]", parts.join(","))
}

fn raw(s: String) -> Result<Box<RawValue>> {
    RawValue::from_string(s).map_err(|e| Error::Checkpoint(e.to_string()))
}

fn layer_out<'a>(name: &'a str, layer: &Dense) -> Result<LayerOut<'a>> {
    if !layer.is_finite() {
        return Err(Error::Checkpoint(format!(
            "layer {name} has non-finite weights"
        )));
    }
    let rows: Vec<String> = (0..layer.rows)
        .map(|r| decimal_array(layer.row(r)))
        .collect();
    Ok(LayerOut {
        name,
        rows: layer.rows,
        cols: layer.cols,
        weight: raw(format!("[{}]", rows.join(",\n")))?,
        bias: raw(decimal_array(&layer.bias))?,
    })
}

pub fn checkpoint_to_string(model: &TrainedModel, schema: &FeatureSchema) -> Result<String> {
    let layers = model
        .named_layers()
        .into_iter()
        .map(|(name, l)| layer_out(name, l))
        .collect::<Result<Vec<_>>>()?;
    let out = CheckpointOut {
        format: CHECKPOINT_FORMAT,
        version: CHECKPOINT_VERSION,
        kind: model.kind(),
        config: model.config(),
        classes: class_names(model.config().n_classes),
        schema,
        adam_step: model.adam_step(),
        layers,
    };
    serde_json::to_string_pretty(&out).map_err(|e| Error::Checkpoint(e.to_string()))
}

pub fn save_checkpoint(path: &Path, model: &TrainedModel, schema: &FeatureSchema) -> Result<()> {
    write_text(path, &checkpoint_to_string(model, schema)?)
}

fn layer_in(layers: &mut Vec<LayerIn>, name: &str, rows: usize, cols: usize) -> Result<Dense> {
    let pos = layers
        .iter()
        .position(|l| l.name == name)
        .ok_or_else(|| Error::Checkpoint(format!("missing layer {name}")))?;
    let l = layers.remove(pos);
    let shape_ok = l.rows == rows
        && l.cols == cols
        && l.weight.len() == rows
        && l.weight.iter().all(|r| r.len() == cols)
        && l.bias.len() == rows;
    if !shape_ok {
        return Err(Error::Checkpoint(format!(
            "layer {name} has shape {}x{}, config expects {rows}x{cols}",
            l.rows, l.cols
        )));
    }
    Ok(Dense {
        rows,
        cols,
        weight: l.weight.into_iter().flatten().collect(),
        bias: l.bias,
    })
}

pub fn checkpoint_from_str(text: &str) -> Result<Checkpoint> {
    let mut c: CheckpointIn =
        serde_json::from_str(text).map_err(|e| Error::Checkpoint(format!("parse error: {e}")))?;
    if c.format != CHECKPOINT_FORMAT {
        return Err(Error::Checkpoint(format!(
            "not a checkpoint (format {:?})",
            c.format
        )));
    }
    if c.version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported version {} (expected {CHECKPOINT_VERSION})",
            c.version
        )));
    }
    c.config.validate()?;
    if c.classes != class_names(c.config.n_classes) {
        return Err(Error::Checkpoint(
            "class names or order do not match".into(),
        ));
    }
    let cfg = c.config;
    let model = match c.kind.as_str() {
        "fusion" => {
            let projection = layer_in(
                &mut c.layers,
                "projection",
                cfg.projection_width(),
                cfg.d_aux,
            )?;
            let hidden = layer_in(&mut c.layers, "hidden", cfg.d_hidden, cfg.fused_width())?;
            let output = layer_in(&mut c.layers, "output", cfg.n_classes, cfg.d_hidden)?;
            let mut adam = AdamState::for_layers(&[&projection, &hidden, &output]);
            adam.step = c.adam_step;
            TrainedModel::Fusion(FusionParameters {
                config: cfg,
                projection,
                hidden,
                output,
                adam,
            })
        }
        "logistic" => {
            let output = layer_in(
                &mut c.layers,
                "output",
                cfg.n_classes,
                cfg.d_embed + cfg.d_aux,
            )?;
            let mut adam = AdamState::for_layers(&[&output]);
            adam.step = c.adam_step;
            TrainedModel::Logistic(LogisticParameters {
                config: cfg,
                output,
                adam,
            })
        }
        other => return Err(Error::Checkpoint(format!("unknown model kind {other:?}"))),
    };
    if c.schema.d_aux != model.config().d_aux || c.schema.d_embed != model.config().d_embed {
        return Err(Error::Checkpoint(
            "schema dimensions disagree with model config".into(),
        ));
    }
    Ok(Checkpoint {
        model,
        schema: c.schema,
    })
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    checkpoint_from_str(&read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Condition;
    use crate::net::rng::XorShiftStar;

    fn cfg() -> ModelConfig {
        ModelConfig {
            d_embed: 6,
            d_aux: 5,
            d_h: 4,
            d_hidden: 7,
            seed: 21,
            ..ModelConfig::default()
        }
    }

    fn schema(c: &ModelConfig) -> FeatureSchema {
        FeatureSchema::for_condition(
            Condition::EmbedEmotion,
            "hash-fnv1a",
            c.d_embed,
            Some("lexicon"),
            0,
        )
        .unwrap()
    }

    #[test]
    fn round_trip_preserves_predictions_exactly() {
        let c = cfg();
        let mut p = FusionParameters::init(&c).unwrap();
        p.output.bias[2] = 0.1 + 0.2;
        p.hidden.bias[0] = -1e-300;
        let model = TrainedModel::Fusion(p);
        let text = checkpoint_to_string(&model, &schema(&c)).unwrap();
        let back = checkpoint_from_str(&text).unwrap();
        assert_eq!(back.model, model);
        let mut rng = XorShiftStar::new(1);
        for _ in 0..50 {
            let e: Vec<f64> = (0..6).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let a: Vec<f64> = (0..5).map(|_| rng.uniform(0.0, 1.0)).collect();
            assert_eq!(
                model.predict(&e, &a).unwrap(),
                back.model.predict(&e, &a).unwrap()
            );
        }
    }

    #[test]
    fn logistic_round_trip() {
        let c = cfg();
        let model = TrainedModel::Logistic(LogisticParameters::init(&c).unwrap());
        let back =
            checkpoint_from_str(&checkpoint_to_string(&model, &schema(&c)).unwrap()).unwrap();
        assert_eq!(back.model, model);
    }

    #[test]
    fn truncated_and_versioned_files_fail() {
        let c = cfg();
        let model = TrainedModel::Fusion(FusionParameters::init(&c).unwrap());
        let text = checkpoint_to_string(&model, &schema(&c)).unwrap();
        assert!(matches!(
            checkpoint_from_str(&text[..text.len() / 2]),
            Err(Error::Checkpoint(_))
        ));
        let bumped = text.replacen("\"version\": 1", "\"version\": 2", 1);
        let err = checkpoint_from_str(&bumped).unwrap_err().to_string();
        assert!(err.contains("version"), "{err}");
    }

    #[test]
    fn shape_mismatch_fails() {
        let c = cfg();
        let model = TrainedModel::Fusion(FusionParameters::init(&c).unwrap());
        let text = checkpoint_to_string(&model, &schema(&c)).unwrap();
        let broken = text.replacen("\"d_hidden\": 7", "\"d_hidden\": 8", 1);
        assert!(checkpoint_from_str(&broken).is_err());
    }

    #[test]
    fn weights_use_seventeen_digits() {
        let c = cfg();
        let model = TrainedModel::Fusion(FusionParameters::init(&c).unwrap());
        let text = checkpoint_to_string(&model, &schema(&c)).unwrap();
        assert!(text.contains("0.0000000000000000e0"));
    }
}
