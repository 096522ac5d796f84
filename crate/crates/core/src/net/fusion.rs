use super::adam::{adam_update, AdamState};
use super::dense::Dense;
use super::loss::{per_sample_loss, softmax};
use super::rng::XorShiftStar;
use super::{check_dim, Classifier, Example, ModelConfig};
use crate::error::Result;

/// Weights of the fusion network plus optimizer state.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionParameters {
    pub config: ModelConfig,
    /// `W1, b1`: aux block to h_f. Zero-sized when `d_aux == 0`.
    pub projection: Dense,
    /// `W2, b2`: z_f to the 256-wide hidden layer.
    pub hidden: Dense,
    /// `W3, b3`: hidden layer to logits.
    pub output: Dense,
    pub adam: AdamState,
}

/// Per-layer gradients, in the same order as the model's layer list.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

impl Gradients {
    pub fn zeros_like(layers: &[&Dense]) -> Self {
        Gradients {
            layers: layers.iter().map(|l| l.zeros_like()).collect(),
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.layers.iter_mut().for_each(|l| l.scale(factor));
    }
}

/// Intermediate activations of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    pub embed_input: Vec<f64>,
    pub aux_input: Vec<f64>,
    /// h_f
    pub projected: Vec<f64>,
    /// z_f = [b_f; h_f]
    pub fused: Vec<f64>,
    pub hidden_pre_dropout: Vec<f64>,
    /// o_f
    pub hidden: Vec<f64>,
    pub logits: Vec<f64>,
    pub probabilities: Vec<f64>,
    /// `true` for kept units. All `true` outside training.
    pub dropout_mask: Vec<bool>,
    /// Scale applied to kept units, `1 / (1 - rate)`.
    pub keep_scale: f64,
}

fn relu(v: Vec<f64>) -> Vec<f64> {
    v.into_iter().map(|x| x.max(0.0)).collect()
}

impl FusionParameters {
    /// Glorot-uniform weights from the pinned generator, zero biases and moments.
    pub fn init(config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = XorShiftStar::stream(config.seed, 1);
        let projection = Dense::glorot(config.projection_width(), config.d_aux, &mut rng);
        let hidden = Dense::glorot(config.d_hidden, config.fused_width(), &mut rng);
        let output = Dense::glorot(config.n_classes, config.d_hidden, &mut rng);
        let adam = AdamState::for_layers(&[&projection, &hidden, &output]);
        Ok(FusionParameters {
            config: config.clone(),
            projection,
            hidden,
            output,
            adam,
        })
    }

    pub fn layers(&self) -> [&Dense; 3] {
        [&self.projection, &self.hidden, &self.output]
    }

    pub fn layers_mut(&mut self) -> [&mut Dense; 3] {
        [&mut self.projection, &mut self.hidden, &mut self.output]
    }

    /// Runs the network. Passing `dropout` enables training-mode inverted dropout.
    pub fn forward(
        &self,
        x_embed: &[f64],
        x_aux: &[f64],
        dropout: Option<&mut XorShiftStar>,
    ) -> Result<ForwardTrace> {
        let cfg = &self.config;
        check_dim("embedding input", cfg.d_embed, x_embed.len())?;
        check_dim("auxiliary input", cfg.d_aux, x_aux.len())?;

        let projected = if cfg.d_aux == 0 {
            Vec::new()
        } else {
            relu(self.projection.forward(x_aux))
        };
        let fused: Vec<f64> = x_embed.iter().chain(&projected).copied().collect();
        let hidden_pre_dropout = relu(self.hidden.forward(&fused));

        let rate = cfg.dropout_rate;
        let (dropout_mask, keep_scale) = match dropout {
            Some(rng) if rate > 0.0 => (
                (0..cfg.d_hidden).map(|_| rng.next_f64() >= rate).collect(),
                1.0 / (1.0 - rate),
            ),
            _ => (vec![true; cfg.d_hidden], 1.0),
        };
        let hidden: Vec<f64> = hidden_pre_dropout
            .iter()
            .zip(&dropout_mask)
            .map(|(h, keep)| if *keep { h * keep_scale } else { 0.0 })
            .collect();
        let logits = self.output.forward(&hidden);
        let probabilities = softmax(&logits);
        Ok(ForwardTrace {
            embed_input: x_embed.to_vec(),
            aux_input: x_aux.to_vec(),
            projected,
            fused,
            hidden_pre_dropout,
            hidden,
            logits,
            probabilities,
            dropout_mask,
            keep_scale,
        })
    }

    /// Adds the gradient of `-log ŷ_target` for one trace into `grads`.
    pub fn accumulate_backward(&self, trace: &ForwardTrace, target: usize, grads: &mut Gradients) {
        let cfg = &self.config;
        let mut d_logits = trace.probabilities.clone();
        d_logits[target] -= 1.0;

        let [g_proj, g_hidden, g_out] = &mut grads.layers[..] else {
            panic!("fusion gradients must have three layers");
        };
        g_out.accumulate_outer(&d_logits, &trace.hidden);
        let d_o = self.output.backprop_input(&d_logits, 0);

        let d_pre: Vec<f64> = d_o
            .iter()
            .zip(&trace.dropout_mask)
            .zip(&trace.hidden_pre_dropout)
            .map(|((d, keep), h)| {
                if *keep && *h > 0.0 {
                    d * trace.keep_scale
                } else {
                    0.0
                }
            })
            .collect();
        g_hidden.accumulate_outer(&d_pre, &trace.fused);

        if cfg.d_aux > 0 {
            let d_h = self.hidden.backprop_input(&d_pre, cfg.d_embed);
            let d_proj: Vec<f64> = d_h
                .iter()
                .zip(&trace.projected)
                .map(|(d, h)| if *h > 0.0 { *d } else { 0.0 })
                .collect();
            g_proj.accumulate_outer(&d_proj, &trace.aux_input);
        }
    }

    /// Mean-loss gradients for a batch of (trace, target) pairs.
    pub fn backward(&self, traces: &[(ForwardTrace, usize)]) -> Gradients {
        let mut grads = Gradients::zeros_like(&self.layers());
        for (trace, target) in traces {
            self.accumulate_backward(trace, *target, &mut grads);
        }
        if !traces.is_empty() {
            grads.scale(1.0 / traces.len() as f64);
        }
        grads
    }

    pub fn adam_step(&mut self, grads: &Gradients) {
        let cfg = self.config.clone();
        let mut adam = std::mem::replace(&mut self.adam, AdamState::for_layers(&[]));
        adam_update(&mut self.layers_mut(), &grads.layers, &mut adam, &cfg);
        self.adam = adam;
    }
}

impl Classifier for FusionParameters {
    fn config(&self) -> &ModelConfig {
        &self.config
    }

    fn probabilities(&self, x_embed: &[f64], x_aux: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(x_embed, x_aux, None)?.probabilities)
    }

    fn batch_gradients(
        &self,
        batch: &[&Example],
        rng: &mut XorShiftStar,
    ) -> Result<(f64, Gradients)> {
        let mut grads = Gradients::zeros_like(&self.layers());
        let mut loss = 0.0;
        for ex in batch {
            let trace = self.forward(&ex.embed, &ex.aux, Some(&mut *rng))?;
            loss += ex.loss(&trace.probabilities);
            self.accumulate_backward(&trace, ex.label, &mut grads);
        }
        if !batch.is_empty() {
            grads.scale(1.0 / batch.len() as f64);
        }
        Ok((loss, grads))
    }

    fn apply_gradients(&mut self, grads: &Gradients) {
        self.adam_step(grads);
    }
}

impl Example {
    pub(crate) fn loss(&self, probabilities: &[f64]) -> f64 {
        let mut target = vec![0.0; probabilities.len()];
        target[self.label] = 1.0;
        per_sample_loss(probabilities, &target)
    }
}
