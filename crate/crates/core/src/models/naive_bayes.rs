//! Gaussian naive Bayes with weighted sufficient statistics.
//!
//! Each class keeps a prior plus per-feature means and variances, all
//! computed as weight-normalized moments (maximum-likelihood form, so
//! variances divide by the class weight, not weight minus one). A floor
//! keeps degenerate variances strictly positive. Prediction applies
//! Bayes' rule in log space; both class log-joints are combined through
//! a numerically stable log-sum-exp.

use crate::error::{Error, Result};
use crate::models::{ModelInputs, ModelParams, TrainConfig};

/// Smallest variance a feature is allowed; guards constant features.
pub const VARIANCE_FLOOR: f64 = 1e-9;

/// Per-class Gaussian statistics. Index 0 holds the negative class.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayesParams {
    pub priors: [f64; 2],
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
}

impl NaiveBayesParams {
    pub fn predict_proba(&self, rows: &[Vec<f64>]) -> Vec<f64> {
        rows.iter()
            .map(|row| {
                let log_joint = |class: usize| -> f64 {
                    let mut lp = self.priors[class].ln();
                    for ((&x, &mu), &var) in row
                        .iter()
                        .zip(&self.means[class])
                        .zip(&self.variances[class])
                    {
                        let diff = x - mu;
                        lp += -0.5 * (std::f64::consts::TAU * var).ln()
                            - diff * diff / (2.0 * var);
                    }
                    lp
                };
                let l0 = log_joint(0);
                let l1 = log_joint(1);
                // P(1 | x) = exp(l1) / (exp(l0) + exp(l1)), stabilized.
                let m = l0.max(l1);
                let e0 = (l0 - m).exp();
                let e1 = (l1 - m).exp();
                e1 / (e0 + e1)
            })
            .collect()
    }
}

pub(crate) fn fit(inputs: &ModelInputs<'_>, _cfg: &TrainConfig) -> Result<(ModelParams, Vec<f64>)> {
    let d = inputs.n_features();
    let n = inputs.n_rows();

    let mut class_weight = [0.0f64; 2];
    for i in 0..n {
        class_weight[usize::from(inputs.labels[i])] += inputs.weight(i);
    }
    if class_weight[0] <= 0.0 || class_weight[1] <= 0.0 {
        return Err(Error::Training(
            "gaussian_naive_bayes needs positive weight in both classes; \
             the training set is effectively single-class"
                .into(),
        ));
    }

    let mut means = [vec![0.0f64; d], vec![0.0f64; d]];
    for i in 0..n {
        let c = usize::from(inputs.labels[i]);
        let w = inputs.weight(i);
        for (m, &x) in means[c].iter_mut().zip(&inputs.features[i]) {
            *m += w * x;
        }
    }
    for c in 0..2 {
        for m in means[c].iter_mut() {
            *m /= class_weight[c];
        }
    }

    let mut variances = [vec![0.0f64; d], vec![0.0f64; d]];
    for i in 0..n {
        let c = usize::from(inputs.labels[i]);
        let w = inputs.weight(i);
        for ((v, &x), &mu) in variances[c]
            .iter_mut()
            .zip(&inputs.features[i])
            .zip(&means[c])
        {
            let diff = x - mu;
            *v += w * diff * diff;
        }
    }
    for c in 0..2 {
        for v in variances[c].iter_mut() {
            *v = (*v / class_weight[c]).max(VARIANCE_FLOOR);
        }
    }

    let total = class_weight[0] + class_weight[1];
    let params = NaiveBayesParams {
        priors: [class_weight[0] / total, class_weight[1] / total],
        means,
        variances,
    };
    Ok((ModelParams::NaiveBayes(params), Vec::new()))
}
