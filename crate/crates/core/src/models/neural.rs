//! Feed-forward network `[d, 32, 16, 1]` with rectified-linear hidden
//! units and a logistic output, trained by mini-batch gradient descent
//! with momentum 0.9.
//!
//! With `lambda > 0` each batch minimizes the composite objective
//!
//! ```text
//! L = BCE(y, p) + lambda * EMS_theta(r),   r_i = moral_risk(p_i, ej_i, tau_i)
//! ```
//!
//! whose exact output-layer gradient is
//!
//! ```text
//! dL/dz_i = w_i (p_i - y_i) / W_b  +  lambda * nu_i * (tau_i - ej_i) * p_i (1 - p_i)
//! ```
//!
//! where `nu_i = 1[r_i > t*] / (theta * b)` is the tail subgradient with
//! a fresh CVaR anchor `t*` per batch. `moral_risk` is linear in the
//! probability with slope exactly `tau_i - ej_i`, so away from anchor
//! ties this gradient is the true derivative, not just a subgradient.
//! `lambda = 0` skips the risk path entirely and recovers plain
//! cross-entropy training bit for bit.
//!
//! The rectifier's subgradient at 0 is taken as 0, and the loss value
//! clamps probabilities into `[1e-7, 1 - 1e-7]` while the gradient uses
//! the exact unclamped form `p - y` (the two differ only for samples
//! already saturated beyond the clamp).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::models::{sigmoid, ModelInputs, ModelParams, MoralContext, TrainConfig, PROB_CLAMP};
use crate::risk::{ems, ems_subgradient, moral_risk, TailFraction};

pub const HIDDEN_LAYERS: [usize; 2] = [32, 16];
pub const MOMENTUM: f64 = 0.9;

/// One dense layer; `weights` is row-major `[out_dim x in_dim]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl DenseLayer {
    /// `z = W a + b` for a flat batch `a` of `rows * in_dim` values.
    fn forward(&self, a: &[f64], rows: usize, z: &mut Vec<f64>) {
        z.clear();
        z.resize(rows * self.out_dim, 0.0);
        for r in 0..rows {
            let input = &a[r * self.in_dim..(r + 1) * self.in_dim];
            let out = &mut z[r * self.out_dim..(r + 1) * self.out_dim];
            for (o, zo) in out.iter_mut().enumerate() {
                let w_row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
                let mut acc = self.biases[o];
                for (w, x) in w_row.iter().zip(input) {
                    acc += w * x;
                }
                *zo = acc;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeuralParams {
    pub layers: Vec<DenseLayer>,
}

impl NeuralParams {
    /// Glorot-uniform initialization for the given layer widths
    /// (`dims[0]` is the input arity, `dims.last()` must be 1).
    pub fn glorot(dims: &[usize], seed: u64) -> NeuralParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = dims
            .windows(2)
            .map(|pair| {
                let (fan_in, fan_out) = (pair[0], pair[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                DenseLayer {
                    in_dim: fan_in,
                    out_dim: fan_out,
                    weights: (0..fan_in * fan_out)
                        .map(|_| rng.gen_range(-limit..limit))
                        .collect(),
                    biases: vec![0.0; fan_out],
                }
            })
            .collect();
        NeuralParams { layers }
    }

    pub fn predict_proba(&self, rows: &[Vec<f64>]) -> Vec<f64> {
        rows.iter()
            .map(|row| {
                let mut a: Vec<f64> = row.clone();
                let mut z = Vec::new();
                for (l, layer) in self.layers.iter().enumerate() {
                    layer.forward(&a, 1, &mut z);
                    if l + 1 < self.layers.len() {
                        for v in z.iter_mut() {
                            *v = v.max(0.0);
                        }
                    }
                    std::mem::swap(&mut a, &mut z);
                }
                sigmoid(a[0])
            })
            .collect()
    }

    fn zeros_like(&self) -> NeuralGradients {
        NeuralGradients {
            layers: self
                .layers
                .iter()
                .map(|l| LayerGradient {
                    weights: vec![0.0; l.weights.len()],
                    biases: vec![0.0; l.biases.len()],
                })
                .collect(),
        }
    }
}

/// Gradient of the batch loss, shaped exactly like [`NeuralParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct NeuralGradients {
    pub layers: Vec<LayerGradient>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

/// Composite loss and its exact analytic gradient over one batch.
///
/// The rows form a single batch: the CVaR anchor is computed over all of
/// them. Weights default to 1; the risk path activates when
/// `lambda > 0`, which then requires `moral` context.
pub fn loss_and_gradients(
    params: &NeuralParams,
    features: &[Vec<f64>],
    labels: &[u8],
    weights: Option<&[f64]>,
    moral: Option<MoralContext<'_>>,
    lambda: f64,
    theta: TailFraction,
) -> Result<(f64, NeuralGradients)> {
    let inputs = ModelInputs {
        features,
        labels,
        weights,
        moral,
    };
    inputs.validate()?;
    let idx: Vec<usize> = (0..labels.len()).collect();
    batch_loss_and_gradients(params, &inputs, &idx, lambda, theta)
}

/// Index-selected batch view of the shared loss/gradient computation.
fn batch_loss_and_gradients(
    params: &NeuralParams,
    inputs: &ModelInputs<'_>,
    idx: &[usize],
    lambda: f64,
    theta: TailFraction,
) -> Result<(f64, NeuralGradients)> {
    let b = idx.len();
    let n_layers = params.layers.len();
    let batch_weight: f64 = idx.iter().map(|&i| inputs.weight(i)).sum();
    if batch_weight <= 0.0 {
        return Err(Error::Training(
            "batch has zero total sample weight; nothing to fit".into(),
        ));
    }

    // Forward pass, keeping pre-activations for the rectifier masks.
    let in_dim = params.layers[0].in_dim;
    let mut input_flat = Vec::with_capacity(b * in_dim);
    for &i in idx {
        input_flat.extend_from_slice(&inputs.features[i]);
    }
    let mut pre: Vec<Vec<f64>> = Vec::with_capacity(n_layers);
    let mut post: Vec<Vec<f64>> = Vec::with_capacity(n_layers);
    for (l, layer) in params.layers.iter().enumerate() {
        let a_prev = if l == 0 { &input_flat } else { &post[l - 1] };
        let mut z = Vec::new();
        layer.forward(a_prev, b, &mut z);
        let activated = if l + 1 < n_layers {
            z.iter().map(|&v| v.max(0.0)).collect()
        } else {
            z.iter().map(|&v| sigmoid(v)).collect()
        };
        pre.push(z);
        post.push(activated);
    }
    let probs = &post[n_layers - 1];

    // Loss value: weight-normalized clamped cross-entropy plus the tail
    // term over prediction-coupled risks.
    let mut bce = 0.0;
    for (r, &i) in idx.iter().enumerate() {
        let p = probs[r].clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
        bce -= inputs.weight(i)
            * if inputs.labels[i] == 1 {
                p.ln()
            } else {
                (1.0 - p).ln()
            };
    }
    bce /= batch_weight;

    let mut loss = bce;
    let mut tail_weights: Option<Vec<f64>> = None;
    if lambda > 0.0 {
        let m = inputs.moral.as_ref().expect("validated by caller");
        let risks = idx
            .iter()
            .enumerate()
            .map(|(r, &i)| moral_risk(probs[r], m.ej[i], m.tau_plus[i]))
            .collect::<Result<Vec<f64>>>()?;
        loss += lambda * ems(&risks, theta)?;
        tail_weights = Some(ems_subgradient(&risks, theta)?);
    }

    // Output-layer delta, then backpropagate.
    let mut delta = vec![0.0f64; b];
    for (r, &i) in idx.iter().enumerate() {
        let p = probs[r];
        let mut d = inputs.weight(i) * (p - f64::from(inputs.labels[i])) / batch_weight;
        if let (Some(nu), Some(m)) = (&tail_weights, &inputs.moral) {
            d += lambda * nu[r] * (m.tau_plus[i] - m.ej[i]) * p * (1.0 - p);
        }
        delta[r] = d;
    }

    let mut grads = params.zeros_like();
    for l in (0..n_layers).rev() {
        let layer = &params.layers[l];
        let a_prev: &[f64] = if l == 0 { &input_flat } else { &post[l - 1] };
        let grad = &mut grads.layers[l];
        for r in 0..b {
            let d_row = &delta[r * layer.out_dim..(r + 1) * layer.out_dim];
            let a_row = &a_prev[r * layer.in_dim..(r + 1) * layer.in_dim];
            for (o, &d) in d_row.iter().enumerate() {
                grad.biases[o] += d;
                let w_row = &mut grad.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                for (g, &a) in w_row.iter_mut().zip(a_row) {
                    *g += d * a;
                }
            }
        }
        if l > 0 {
            // delta_prev = W^T delta, gated by the rectifier mask.
            let mut prev = vec![0.0f64; b * layer.in_dim];
            for r in 0..b {
                let d_row = &delta[r * layer.out_dim..(r + 1) * layer.out_dim];
                let p_row = &mut prev[r * layer.in_dim..(r + 1) * layer.in_dim];
                for (o, &d) in d_row.iter().enumerate() {
                    let w_row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                    for (p, &w) in p_row.iter_mut().zip(w_row) {
                        *p += w * d;
                    }
                }
                for (p, &z) in p_row.iter_mut().zip(&pre[l - 1][r * layer.in_dim..]) {
                    if z <= 0.0 {
                        *p = 0.0;
                    }
                }
            }
            delta = prev;
        }
    }
    Ok((loss, grads))
}

pub(crate) fn fit(inputs: &ModelInputs<'_>, cfg: &TrainConfig) -> Result<(ModelParams, Vec<f64>)> {
    let n = inputs.n_rows();
    let d = inputs.n_features();
    let dims = [d, HIDDEN_LAYERS[0], HIDDEN_LAYERS[1], 1];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = NeuralParams::glorot(&dims, rng.gen());

    let mut velocity = params.zeros_like();
    let mut order: Vec<usize> = (0..n).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for batch in order.chunks(cfg.batch_size) {
            if batch.iter().map(|&i| inputs.weight(i)).sum::<f64>() <= 0.0 {
                continue;
            }
            let (loss, grads) =
                batch_loss_and_gradients(&params, inputs, batch, cfg.lambda, cfg.theta)?;
            if !loss.is_finite() {
                return Err(Error::Training(format!(
                    "non-finite loss at epoch {epoch}; reduce learning_rate \
                     (currently {}) or lambda (currently {})",
                    cfg.learning_rate, cfg.lambda
                )));
            }
            for (layer, (v, g)) in params
                .layers
                .iter_mut()
                .zip(velocity.layers.iter_mut().zip(&grads.layers))
            {
                for ((w, v), &g) in layer
                    .weights
                    .iter_mut()
                    .zip(v.weights.iter_mut())
                    .zip(&g.weights)
                {
                    *v = MOMENTUM * *v - cfg.learning_rate * g;
                    *w += *v;
                }
                for ((bias, v), &g) in layer
                    .biases
                    .iter_mut()
                    .zip(v.biases.iter_mut())
                    .zip(&g.biases)
                {
                    *v = MOMENTUM * *v - cfg.learning_rate * g;
                    *bias += *v;
                }
            }
            epoch_loss += loss;
            batches += 1;
        }
        trace.push(if batches > 0 {
            epoch_loss / batches as f64
        } else {
            f64::NAN
        });
    }
    Ok((ModelParams::Neural(params), trace))
}
