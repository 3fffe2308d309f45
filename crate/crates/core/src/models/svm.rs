//! Linear support-vector machine trained by stochastic subgradient
//! descent on the l2-regularized hinge loss,
//!
//! ```text
//! J(w, b) = (1/W) * sum_i w_i * max(0, 1 - y'_i (w.x_i + b)) + (l2/2)|w|^2
//! ```
//!
//! with labels recoded to y' in {-1, +1}. Visit order is reshuffled each
//! epoch from the seeded generator, sample weights scale each update, and
//! the intercept escapes regularization. Because an SVM margin is not a
//! probability, a one-dimensional logistic link `sigma(a*m + b)` is
//! fitted on the training margins afterwards by full-batch descent.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::models::{dot, sigmoid, ModelInputs, ModelParams, TrainConfig};

/// Iterations of the calibration fit; enough for a 2-parameter logistic.
const CALIBRATION_EPOCHS: usize = 500;
const CALIBRATION_RATE: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub struct SvmParams {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Logistic-link slope applied to the margin.
    pub link_slope: f64,
    /// Logistic-link intercept.
    pub link_intercept: f64,
}

impl SvmParams {
    pub fn margin(&self, row: &[f64]) -> f64 {
        dot(&self.weights, row) + self.bias
    }

    pub fn predict_proba(&self, rows: &[Vec<f64>]) -> Vec<f64> {
        rows.iter()
            .map(|row| sigmoid(self.link_slope * self.margin(row) + self.link_intercept))
            .collect()
    }
}

pub(crate) fn fit(inputs: &ModelInputs<'_>, cfg: &TrainConfig) -> Result<(ModelParams, Vec<f64>)> {
    let n = inputs.n_rows();
    let d = inputs.n_features();
    if inputs.labels.iter().all(|&y| y == 0) || inputs.labels.iter().all(|&y| y == 1) {
        return Err(Error::Training(
            "linear_svm needs both classes present; the training set is \
             effectively single-class"
                .into(),
        ));
    }
    let total_weight: f64 = (0..n).map(|i| inputs.weight(i)).sum();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut weights = vec![0.0f64; d];
    let mut bias = 0.0f64;
    let mut order: Vec<usize> = (0..n).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let w_i = inputs.weight(i);
            if w_i == 0.0 {
                continue;
            }
            let row = &inputs.features[i];
            let signed = 2.0 * f64::from(inputs.labels[i]) - 1.0;
            let margin = signed * (dot(&weights, row) + bias);
            // Subgradient step; regularization shrinks every step.
            let shrink = 1.0 - cfg.learning_rate * cfg.l2;
            for w in weights.iter_mut() {
                *w *= shrink;
            }
            if margin < 1.0 {
                let step = cfg.learning_rate * w_i * signed;
                for (w, &x) in weights.iter_mut().zip(row) {
                    *w += step * x;
                }
                bias += step;
            }
        }
        // Epoch loss for the trace (hinge + ridge).
        let mut hinge = 0.0;
        for i in 0..n {
            let signed = 2.0 * f64::from(inputs.labels[i]) - 1.0;
            let m = signed * (dot(&weights, &inputs.features[i]) + bias);
            hinge += inputs.weight(i) * (1.0 - m).max(0.0);
        }
        trace.push(hinge / total_weight + 0.5 * cfg.l2 * weights.iter().map(|w| w * w).sum::<f64>());
    }

    // Calibrate margins -> probabilities with a weighted logistic link.
    let margins: Vec<f64> = inputs
        .features
        .iter()
        .map(|row| dot(&weights, row) + bias)
        .collect();
    let (link_slope, link_intercept) = fit_link(&margins, inputs, total_weight);

    Ok((
        ModelParams::Svm(SvmParams {
            weights,
            bias,
            link_slope,
            link_intercept,
        }),
        trace,
    ))
}

/// Full-batch logistic regression of the labels on the margin alone.
fn fit_link(margins: &[f64], inputs: &ModelInputs<'_>, total_weight: f64) -> (f64, f64) {
    let mut a = 1.0f64;
    let mut b = 0.0f64;
    for _ in 0..CALIBRATION_EPOCHS {
        let mut grad_a = 0.0;
        let mut grad_b = 0.0;
        for (i, &m) in margins.iter().enumerate() {
            let w_i = inputs.weight(i);
            if w_i == 0.0 {
                continue;
            }
            let err = w_i * (sigmoid(a * m + b) - f64::from(inputs.labels[i])) / total_weight;
            grad_a += err * m;
            grad_b += err;
        }
        a -= CALIBRATION_RATE * grad_a;
        b -= CALIBRATION_RATE * grad_b;
    }
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{fit as fit_family, ModelFamily};

    fn separable() -> (Vec<Vec<f64>>, Vec<u8>) {
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for i in 0..12 {
            let t = i as f64 / 11.0;
            features.push(vec![0.1 + 0.25 * t, 0.9 - 0.2 * t]);
            labels.push(0u8);
            features.push(vec![0.65 + 0.25 * t, 0.1 + 0.2 * t]);
            labels.push(1u8);
        }
        (features, labels)
    }

    #[test]
    fn separable_data_is_classified_perfectly() {
        let (features, labels) = separable();
        let cfg = TrainConfig::default_for(ModelFamily::LinearSvm);
        let model = fit_family(
            ModelFamily::LinearSvm,
            ModelInputs::new(&features, &labels),
            &cfg,
        )
        .unwrap();
        assert_eq!(model.predict_labels(&features).unwrap(), labels);
    }

    #[test]
    fn probabilities_increase_with_margin() {
        let (features, labels) = separable();
        let cfg = TrainConfig::default_for(ModelFamily::LinearSvm);
        let model = fit_family(
            ModelFamily::LinearSvm,
            ModelInputs::new(&features, &labels),
            &cfg,
        )
        .unwrap();
        let ModelParams::Svm(svm) = &model.params else {
            panic!("expected svm params");
        };
        assert!(svm.link_slope > 0.0, "link must keep margin orientation");
        let mut pairs: Vec<(f64, f64)> = features
            .iter()
            .map(|row| {
                (
                    svm.margin(row),
                    svm.predict_proba(std::slice::from_ref(row))[0],
                )
            })
            .collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        for pair in pairs.windows(2) {
            assert!(pair[0].1 <= pair[1].1 + 1e-12);
        }
    }

    #[test]
    fn single_class_is_an_explicit_error() {
        let features = vec![vec![0.0], vec![1.0]];
        let labels = vec![0u8, 0];
        let cfg = TrainConfig::default_for(ModelFamily::LinearSvm);
        let err = fit_family(
            ModelFamily::LinearSvm,
            ModelInputs::new(&features, &labels),
            &cfg,
        )
        .unwrap_err();
        assert!(err.to_string().contains("single-class"));
    }

    #[test]
    fn zero_weight_rows_never_touch_the_separator() {
        let (features, labels) = separable();
        let cfg = TrainConfig::default_for(ModelFamily::LinearSvm);
        let clean = fit_family(
            ModelFamily::LinearSvm,
            ModelInputs::new(&features, &labels),
            &cfg,
        )
        .unwrap();

        // Appending weight-0 poison rows must not change predictions:
        // shuffles see more indices, so compare decisions, not bits.
        let mut poisoned_features = features.clone();
        let mut poisoned_labels = labels.clone();
        poisoned_features.push(vec![0.15, 0.85]);
        poisoned_labels.push(1u8);
        let mut weights = vec![1.0; labels.len()];
        weights.push(0.0);
        let poisoned = fit_family(
            ModelFamily::LinearSvm,
            ModelInputs::new(&poisoned_features, &poisoned_labels).with_weights(&weights),
            &cfg,
        )
        .unwrap();
        assert_eq!(
            clean.predict_labels(&features).unwrap(),
            poisoned.predict_labels(&features).unwrap()
        );
    }

    #[test]
    fn hinge_trace_trends_downward() {
        let (features, labels) = separable();
        let cfg = TrainConfig::default_for(ModelFamily::LinearSvm);
        let model = fit_family(
            ModelFamily::LinearSvm,
            ModelInputs::new(&features, &labels),
            &cfg,
        )
        .unwrap();
        let first = model.loss_trace.first().copied().unwrap();
        let last = model.loss_trace.last().copied().unwrap();
        assert!(last <= first);
    }
}
