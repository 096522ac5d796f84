use super::rng::XorShiftStar;

/// Fully connected layer `y = W x + b` with `W` stored row-major
/// (`rows` outputs by `cols` inputs).
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub rows: usize,
    pub cols: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Dense {
            rows,
            cols,
            weight: vec![0.0; rows * cols],
            bias: vec![0.0; rows],
        }
    }

    /// Glorot-uniform weights in `(-L, L)`, `L = sqrt(6 / (fan_in + fan_out))`, zero bias.
    pub fn glorot(rows: usize, cols: usize, rng: &mut XorShiftStar) -> Self {
        let mut layer = Dense::zeros(rows, cols);
        if rows + cols > 0 {
            let limit = (6.0 / (rows + cols) as f64).sqrt();
            for w in &mut layer.weight {
                *w = rng.uniform(-limit, limit);
            }
        }
        layer
    }

    pub fn zeros_like(&self) -> Self {
        Dense::zeros(self.rows, self.cols)
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.weight[r * self.cols..(r + 1) * self.cols]
    }

    pub fn param_count(&self) -> usize {
        self.weight.len() + self.bias.len()
    }

    /// `W x + b`, skipping zero inputs (hashed embeddings are sparse).
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        let nz: Vec<usize> = (0..x.len()).filter(|&c| x[c] != 0.0).collect();
        (0..self.rows)
            .map(|r| {
                let row = self.row(r);
                nz.iter().fold(self.bias[r], |acc, &c| acc + row[c] * x[c])
            })
            .collect()
    }

    /// Adds `delta ⊗ input` to the weights and `delta` to the bias.
    pub fn accumulate_outer(&mut self, delta: &[f64], input: &[f64]) {
        let nz: Vec<usize> = (0..input.len()).filter(|&c| input[c] != 0.0).collect();
        for (r, &d) in delta.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            self.bias[r] += d;
            let row = &mut self.weight[r * self.cols..(r + 1) * self.cols];
            for &c in &nz {
                row[c] += d * input[c];
            }
        }
    }

    /// `(W^T delta)[cols]` restricted to input columns `from..cols`.
    pub fn backprop_input(&self, delta: &[f64], from: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.cols - from];
        for (r, &d) in delta.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            let row = &self.row(r)[from..];
            for (o, w) in out.iter_mut().zip(row) {
                *o += w * d;
            }
        }
        out
    }

    pub fn scale(&mut self, factor: f64) {
        self.weight.iter_mut().for_each(|w| *w *= factor);
        self.bias.iter_mut().for_each(|b| *b *= factor);
    }

    pub fn is_finite(&self) -> bool {
        self.weight.iter().chain(&self.bias).all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn glorot_bound_and_zero_bias() {
        let mut rng = XorShiftStar::new(1);
        let l = Dense::glorot(2, 4, &mut rng);
        assert!(l.weight.iter().all(|w| w.abs() <= 1.0));
        assert!(l.bias.iter().all(|b| *b == 0.0));
        let big = Dense::glorot(256, 1074, &mut rng);
        let limit = (6.0f64 / 1330.0).sqrt();
        assert!(big.weight.iter().all(|w| w.abs() <= limit));
    }

    #[test]
    fn forward_and_backprop_match_dense_math() {
        let l = Dense {
            rows: 2,
            cols: 3,
            weight: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            bias: vec![0.5, -0.5],
        };
        assert_eq!(l.forward(&[1.0, 0.0, -1.0]), vec![-1.5, -2.5]);
        assert_eq!(l.backprop_input(&[1.0, 2.0], 0), vec![9.0, 12.0, 15.0]);
        assert_eq!(l.backprop_input(&[1.0, 2.0], 2), vec![15.0]);
        let mut g = l.zeros_like();
        g.accumulate_outer(&[1.0, 0.0], &[2.0, 0.0, 3.0]);
        assert_eq!(g.weight, vec![2.0, 0.0, 3.0, 0.0, 0.0, 0.0]);
        assert_eq!(g.bias, vec![1.0, 0.0]);
    }
}
