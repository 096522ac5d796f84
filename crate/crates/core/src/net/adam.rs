use super::dense::Dense;
use super::ModelConfig;

/// First/second moment accumulators mirroring a model's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub first: Vec<Dense>,
    pub second: Vec<Dense>,
}

impl AdamState {
    pub fn for_layers(layers: &[&Dense]) -> Self {
        AdamState {
            step: 0,
            first: layers.iter().map(|l| l.zeros_like()).collect(),
            second: layers.iter().map(|l| l.zeros_like()).collect(),
        }
    }
}

/// One bias-corrected Adam step over every layer.
pub fn adam_update(
    layers: &mut [&mut Dense],
    grads: &[Dense],
    state: &mut AdamState,
    cfg: &ModelConfig,
) {
    assert_eq!(layers.len(), grads.len());
    state.step += 1;
    let t = state.step as i32;
    let (b1, b2) = (cfg.adam_beta1, cfg.adam_beta2);
    let correct1 = 1.0 - b1.powi(t);
    let correct2 = 1.0 - b2.powi(t);
    for (i, layer) in layers.iter_mut().enumerate() {
        let g = &grads[i];
        let (m, v) = (&mut state.first[i], &mut state.second[i]);
        let params = layer.weight.iter_mut().chain(layer.bias.iter_mut());
        let grad = g.weight.iter().chain(&g.bias);
        let first = m.weight.iter_mut().chain(m.bias.iter_mut());
        let second = v.weight.iter_mut().chain(v.bias.iter_mut());
        for (((p, g), m), v) in params.zip(grad).zip(first).zip(second) {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / correct1;
            let v_hat = *v / correct2;
            *p -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_epsilon);
        }
    }
}
