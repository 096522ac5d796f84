//! Softmax and categorical cross-entropy.

/// Lower bound applied to probabilities before taking the log.
pub const LOG_CLAMP: f64 = 1e-12;

/// Softmax with max-subtraction.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// `-Σ_k y_k log ŷ_k` for one sample.
pub fn per_sample_loss(probabilities: &[f64], target: &[f64]) -> f64 {
    -probabilities
        .iter()
        .zip(target)
        .filter(|(_, y)| **y != 0.0)
        .map(|(p, y)| y * p.max(LOG_CLAMP).ln())
        .sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossEntropy {
    pub sum: f64,
    pub mean: f64,
}

/// Batch cross-entropy over probability rows and (one-hot) target rows.
pub fn cross_entropy(probabilities: &[Vec<f64>], targets: &[Vec<f64>]) -> CrossEntropy {
    assert_eq!(probabilities.len(), targets.len(), "batch size mismatch");
    let sum: f64 = probabilities
        .iter()
        .zip(targets)
        .map(|(p, y)| per_sample_loss(p, y))
        .sum();
    let mean = if probabilities.is_empty() {
        0.0
    } else {
        sum / probabilities.len() as f64
    };
    CrossEntropy { sum, mean }
}
