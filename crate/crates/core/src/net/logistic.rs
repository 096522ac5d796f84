use super::adam::{adam_update, AdamState};
use super::dense::Dense;
use super::fusion::Gradients;
use super::loss::softmax;
use super::rng::XorShiftStar;
use super::{check_dim, Classifier, Example, ModelConfig};
use crate::error::Result;

/// Softmax regression directly on `[x_embed; x_aux]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticParameters {
    pub config: ModelConfig,
    pub output: Dense,
    pub adam: AdamState,
}

impl LogisticParameters {
    pub fn init(config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = XorShiftStar::stream(config.seed, 1);
        let output = Dense::glorot(config.n_classes, config.d_embed + config.d_aux, &mut rng);
        let adam = AdamState::for_layers(&[&output]);
        Ok(LogisticParameters {
            config: config.clone(),
            output,
            adam,
        })
    }

    fn input(&self, x_embed: &[f64], x_aux: &[f64]) -> Result<Vec<f64>> {
        check_dim("embedding input", self.config.d_embed, x_embed.len())?;
        check_dim("auxiliary input", self.config.d_aux, x_aux.len())?;
        Ok(x_embed.iter().chain(x_aux).copied().collect())
    }
}

impl Classifier for LogisticParameters {
    fn config(&self) -> &ModelConfig {
        &self.config
    }

    fn probabilities(&self, x_embed: &[f64], x_aux: &[f64]) -> Result<Vec<f64>> {
        Ok(softmax(&self.output.forward(&self.input(x_embed, x_aux)?)))
    }

    fn batch_gradients(
        &self,
        batch: &[&Example],
        _rng: &mut XorShiftStar,
    ) -> Result<(f64, Gradients)> {
        let mut grads = Gradients::zeros_like(&[&self.output]);
        let mut loss = 0.0;
        for ex in batch {
            let x = self.input(&ex.embed, &ex.aux)?;
            let mut delta = softmax(&self.output.forward(&x));
            loss += ex.loss(&delta);
            delta[ex.label] -= 1.0;
            grads.layers[0].accumulate_outer(&delta, &x);
        }
        if !batch.is_empty() {
            grads.scale(1.0 / batch.len() as f64);
        }
        Ok((loss, grads))
    }

    fn apply_gradients(&mut self, grads: &Gradients) {
        let cfg = self.config.clone();
        adam_update(&mut [&mut self.output], &grads.layers, &mut self.adam, &cfg);
    }
}
