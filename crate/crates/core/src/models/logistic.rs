//! Logistic regression trained by full-batch gradient descent.
//!
//! The objective is weight-normalized cross-entropy plus a ridge term on
//! the coefficients (never the intercept):
//!
//! ```text
//! J(w, b) = (1/W) * sum_i w_i * bce(y_i, sigmoid(w.x_i + b)) + (l2/2) * |w|^2
//! ```
//!
//! Normalizing by the total sample weight `W` makes duplicating a row and
//! doubling its weight the same fit, bit for bit in exact arithmetic and
//! within 1e-6 here. Training is deterministic and ignores `batch_size`:
//! the gradient is always computed over the full set.

use crate::error::Result;
use crate::models::{dot, sigmoid, ModelInputs, ModelParams, TrainConfig};

/// Learned coefficients for the logistic family.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticParams {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogisticParams {
    pub fn predict_proba(&self, rows: &[Vec<f64>]) -> Vec<f64> {
        rows.iter()
            .map(|row| sigmoid(dot(&self.weights, row) + self.bias))
            .collect()
    }
}

pub(crate) fn fit(inputs: &ModelInputs<'_>, cfg: &TrainConfig) -> Result<(ModelParams, Vec<f64>)> {
    let n = inputs.n_rows();
    let d = inputs.n_features();
    let total_weight: f64 = (0..n).map(|i| inputs.weight(i)).sum();

    let mut weights = vec![0.0f64; d];
    let mut bias = 0.0f64;
    let mut trace = Vec::with_capacity(cfg.epochs);

    let mut grad_w = vec![0.0f64; d];
    for _ in 0..cfg.epochs {
        grad_w.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0f64;
        let mut loss = 0.0f64;
        for i in 0..n {
            let w_i = inputs.weight(i);
            if w_i == 0.0 {
                continue;
            }
            let row = &inputs.features[i];
            let p = sigmoid(dot(&weights, row) + bias);
            let y = f64::from(inputs.labels[i]);
            let err = w_i * (p - y) / total_weight;
            for (g, &x) in grad_w.iter_mut().zip(row) {
                *g += err * x;
            }
            grad_b += err;
            let p_safe = p.clamp(super::PROB_CLAMP, 1.0 - super::PROB_CLAMP);
            loss -= w_i
                * if inputs.labels[i] == 1 {
                    p_safe.ln()
                } else {
                    (1.0 - p_safe).ln()
                };
        }
        loss /= total_weight;
        if cfg.l2 > 0.0 {
            loss += 0.5 * cfg.l2 * weights.iter().map(|w| w * w).sum::<f64>();
            for (g, &w) in grad_w.iter_mut().zip(&weights) {
                *g += cfg.l2 * w;
            }
        }
        for (w, &g) in weights.iter_mut().zip(&grad_w) {
            *w -= cfg.learning_rate * g;
        }
        bias -= cfg.learning_rate * grad_b;
        trace.push(loss);
    }

    Ok((ModelParams::Logistic(LogisticParams { weights, bias }), trace))
}
