//! Feedforward fusion classifier and its softmax-regression baseline.
//!
//! ```text
//! aux [c_f; l_f] --dense+relu--> h_f (d_h)
//! z_f = [b_f; h_f] --dense+relu--> hidden (d_hidden) --dropout--> o_f
//! o_f --dense--> logits --softmax--> class probabilities
//! ```
//!
//! Everything runs in `f64` on plain row-major buffers and is trained with a
//! hand-written backward pass and Adam.

mod adam;
mod checkpoint;
mod dense;
mod fusion;
mod logistic;
mod loss;
pub mod rng;
mod train;

pub use adam::{adam_update, AdamState};
pub use checkpoint::{
    checkpoint_from_str, checkpoint_to_string, class_names, load_checkpoint, save_checkpoint,
    Checkpoint, TrainedModel, CHECKPOINT_FORMAT, CHECKPOINT_VERSION,
};
pub use dense::Dense;
pub use fusion::{ForwardTrace, FusionParameters, Gradients};
pub use logistic::LogisticParameters;
pub use loss::{cross_entropy, per_sample_loss, softmax, CrossEntropy, LOG_CLAMP};
pub use rng::XorShiftStar;
pub use train::{
    stratified_split, train, train_logistic_baseline, EpochRecord, Example, TrainOutcome,
    TrainingLog,
};

use serde::{Deserialize, Serialize};

use crate::corpus::TechniqueLabel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub d_embed: usize,
    /// Width of the auxiliary block; 0 disables the projection branch.
    pub d_aux: usize,
    pub d_h: usize,
    pub d_hidden: usize,
    pub n_classes: usize,
    pub dropout_rate: f64,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping; 0 never stops early.
    pub patience: usize,
    pub seed: u64,
    pub validation_fraction: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            d_embed: 1024,
            d_aux: 5,
            d_h: 50,
            d_hidden: 256,
            n_classes: TechniqueLabel::COUNT,
            dropout_rate: 0.5,
            learning_rate: 1e-4,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            batch_size: 32,
            max_epochs: 100,
            patience: 10,
            seed: 0,
            validation_fraction: 0.10,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.d_embed + self.d_aux == 0 {
            return bad("d_embed and d_aux cannot both be zero");
        }
        if self.d_h == 0 || self.d_hidden == 0 || self.n_classes == 0 || self.batch_size == 0 {
            return bad("d_h, d_hidden, n_classes and batch_size must be at least 1");
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad("dropout_rate must be in [0, 1)");
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return bad("validation_fraction must be in (0, 1)");
        }
        if self.learning_rate.is_nan()
            || self.learning_rate <= 0.0
            || self.adam_epsilon.is_nan()
            || self.adam_epsilon <= 0.0
        {
            return bad("learning_rate and adam_epsilon must be positive");
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return bad("adam betas must be in [0, 1)");
        }
        Ok(())
    }

    /// Width of h_f; zero when the auxiliary branch is disabled.
    pub fn projection_width(&self) -> usize {
        if self.d_aux == 0 {
            0
        } else {
            self.d_h
        }
    }

    /// Width of z_f = [b_f; h_f].
    pub fn fused_width(&self) -> usize {
        self.d_embed + self.projection_width()
    }
}

/// A class decision with its probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub class: usize,
    pub probabilities: Vec<f64>,
}

impl Prediction {
    pub(crate) fn from_probabilities(probabilities: Vec<f64>) -> Self {
        Prediction {
            class: argmax(&probabilities),
            probabilities,
        }
    }

    pub fn label(&self) -> Option<TechniqueLabel> {
        TechniqueLabel::from_index(self.class)
    }

    /// Class indices by descending probability, ties by lower index.
    pub fn ranked(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.probabilities.len()).collect();
        order.sort_by(|&a, &b| {
            self.probabilities[b]
                .partial_cmp(&self.probabilities[a])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        order
    }
}

/// First index of the maximum.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Common surface of the two trainable classifiers.
pub trait Classifier: Clone {
    fn config(&self) -> &ModelConfig;

    /// Eval-mode class probabilities.
    fn probabilities(&self, x_embed: &[f64], x_aux: &[f64]) -> Result<Vec<f64>>;

    fn predict(&self, x_embed: &[f64], x_aux: &[f64]) -> Result<Prediction> {
        Ok(Prediction::from_probabilities(
            self.probabilities(x_embed, x_aux)?,
        ))
    }

    /// Mean-loss gradients over a batch, plus the summed per-sample loss.
    fn batch_gradients(
        &self,
        batch: &[&Example],
        rng: &mut XorShiftStar,
    ) -> Result<(f64, Gradients)>;

    fn apply_gradients(&mut self, grads: &Gradients);
}

pub(crate) fn check_dim(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension {
            what: what.to_string(),
            expected,
            got,
        })
    }
}
