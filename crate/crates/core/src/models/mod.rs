//! Five from-scratch binary classifiers behind one fit/predict contract.
//!
//! Every family consumes the same [`ModelInputs`] (row-major features,
//! 0/1 labels, optional per-sample weights) and produces a [`FittedModel`]
//! whose `predict_proba` returns probabilities in `[0, 1]`; hard labels
//! are `1[p >= 0.5]`. Training is deterministic: the tuple
//! (family, data, config, seed) fixes the fitted parameters bit-exactly.
//!
//! The neural family can minimize the composite objective
//!
//! ```text
//! L = BCE(y, yhat) + lambda * EMS_theta(moral risks)
//! ```
//!
//! where the risks couple each prediction to the row's judgment score and
//! threshold; `lambda = 0` recovers plain cross-entropy exactly, and the
//! tail subgradient is routed only through risks strictly above the
//! batch's CVaR anchor.

pub mod forest;
pub mod io;
pub mod logistic;
pub mod naive_bayes;
pub mod neural;
pub mod svm;

use crate::data::mapping::AnnotatedDataset;
use crate::error::{Error, Result};
use crate::risk::{ems, moral_risk, TailFraction};

pub use forest::ForestParams;
pub use logistic::LogisticParams;
pub use naive_bayes::NaiveBayesParams;
pub use neural::{NeuralGradients, NeuralParams};
pub use svm::SvmParams;

/// The classifier families under study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelFamily {
    LogisticRegression,
    GaussianNaiveBayes,
    RandomForest,
    LinearSvm,
    NeuralNet,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 5] = [
        ModelFamily::LogisticRegression,
        ModelFamily::GaussianNaiveBayes,
        ModelFamily::RandomForest,
        ModelFamily::LinearSvm,
        ModelFamily::NeuralNet,
    ];

    /// Stable identifier used in reports, files, and CLI flags.
    pub fn name(self) -> &'static str {
        match self {
            ModelFamily::LogisticRegression => "logistic_regression",
            ModelFamily::GaussianNaiveBayes => "gaussian_naive_bayes",
            ModelFamily::RandomForest => "random_forest",
            ModelFamily::LinearSvm => "linear_svm",
            ModelFamily::NeuralNet => "neural_net",
        }
    }

    /// Parses both the stable identifier and a short alias.
    pub fn parse(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "logistic_regression" | "lr" => Ok(ModelFamily::LogisticRegression),
            "gaussian_naive_bayes" | "nb" => Ok(ModelFamily::GaussianNaiveBayes),
            "random_forest" | "rf" => Ok(ModelFamily::RandomForest),
            "linear_svm" | "svm" => Ok(ModelFamily::LinearSvm),
            "neural_net" | "nn" => Ok(ModelFamily::NeuralNet),
            other => Err(Error::validation(
                "model family",
                format!(
                    "unknown family {other:?}; expected one of \
                     logistic_regression/lr, gaussian_naive_bayes/nb, \
                     random_forest/rf, linear_svm/svm, neural_net/nn"
                ),
            )),
        }
    }
}

impl std::fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Which label column a fit trains against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Original,
    Moral,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Original => "original",
            Target::Moral => "moral",
        }
    }
}

/// Knobs shared by every family; fields irrelevant to a family are
/// documented as ignored by its `fit`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    /// Composite-loss coefficient; only the neural family accepts > 0.
    pub lambda: f64,
    /// Tail fraction for the composite loss.
    pub theta: TailFraction,
    /// Ridge coefficient for the gradient-trained linear families.
    pub l2: f64,
}

impl TrainConfig {
    /// Documented defaults per family, smallest standard choices that
    /// reach the expected qualitative ordering on the bundled datasets.
    pub fn default_for(family: ModelFamily) -> Self {
        let base = TrainConfig {
            epochs: 1,
            learning_rate: 0.1,
            batch_size: 32,
            seed: 42,
            lambda: 0.0,
            theta: TailFraction::FULL,
            l2: 0.0,
        };
        match family {
            ModelFamily::LogisticRegression => TrainConfig {
                epochs: 500,
                learning_rate: 0.5,
                l2: 1e-4,
                ..base
            },
            ModelFamily::GaussianNaiveBayes => base,
            ModelFamily::RandomForest => base,
            ModelFamily::LinearSvm => TrainConfig {
                epochs: 300,
                learning_rate: 0.05,
                l2: 1e-4,
                ..base
            },
            ModelFamily::NeuralNet => TrainConfig {
                epochs: 100,
                learning_rate: 0.05,
                batch_size: 32,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::validation("epochs", "must be >= 1"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::validation(
                "learning_rate",
                format!("must be finite and > 0, got {}", self.learning_rate),
            ));
        }
        if self.batch_size == 0 {
            return Err(Error::validation("batch_size", "must be >= 1"));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::validation(
                "lambda",
                format!("must be finite and >= 0, got {}", self.lambda),
            ));
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return Err(Error::validation(
                "l2",
                format!("must be finite and >= 0, got {}", self.l2),
            ));
        }
        Ok(())
    }
}

/// Judgment scores and thresholds that tie predictions to moral risks;
/// required whenever the composite loss is active.
#[derive(Debug, Clone, Copy)]
pub struct MoralContext<'a> {
    pub ej: &'a [f64],
    pub tau_plus: &'a [f64],
}

/// Borrowed training view: row-major features, binary labels, optional
/// nonnegative per-sample weights, optional moral context.
#[derive(Debug, Clone, Copy)]
pub struct ModelInputs<'a> {
    pub features: &'a [Vec<f64>],
    pub labels: &'a [u8],
    pub weights: Option<&'a [f64]>,
    pub moral: Option<MoralContext<'a>>,
}

impl<'a> ModelInputs<'a> {
    /// Plain unweighted inputs.
    pub fn new(features: &'a [Vec<f64>], labels: &'a [u8]) -> Self {
        ModelInputs {
            features,
            labels,
            weights: None,
            moral: None,
        }
    }

    /// View over an annotated dataset, selecting the label column.
    pub fn from_dataset(data: &'a AnnotatedDataset, target: Target) -> Self {
        ModelInputs {
            features: &data.features,
            labels: match target {
                Target::Original => &data.original_label,
                Target::Moral => &data.moral_label,
            },
            weights: None,
            moral: Some(MoralContext {
                ej: &data.ej,
                tau_plus: &data.tau_plus,
            }),
        }
    }

    pub fn with_weights(mut self, weights: &'a [f64]) -> Self {
        self.weights = Some(weights);
        self
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    /// Checks shape, finiteness, label range, and weight sanity.
    pub fn validate(&self) -> Result<()> {
        if self.labels.is_empty() {
            return Err(Error::Training("empty training set".into()));
        }
        if self.features.len() != self.labels.len() {
            return Err(Error::LengthMismatch {
                left: self.features.len(),
                right: self.labels.len(),
            });
        }
        let d = self.n_features();
        if d == 0 {
            return Err(Error::Training("rows have no features".into()));
        }
        for (i, row) in self.features.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Training(format!(
                    "row {i} has {} features, expected {d}",
                    row.len()
                )));
            }
            if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::Training(format!(
                    "row {i} contains non-finite feature {bad}"
                )));
            }
        }
        if let Some(&bad) = self.labels.iter().find(|&&y| y > 1) {
            return Err(Error::Training(format!(
                "labels must be 0 or 1, got {bad}"
            )));
        }
        if let Some(w) = self.weights {
            if w.len() != self.labels.len() {
                return Err(Error::LengthMismatch {
                    left: w.len(),
                    right: self.labels.len(),
                });
            }
            if let Some(&bad) = w.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(Error::Training(format!(
                    "sample weights must be finite and >= 0, got {bad}"
                )));
            }
            if w.iter().sum::<f64>() <= 0.0 {
                return Err(Error::Training(
                    "sample weights sum to zero; nothing to fit".into(),
                ));
            }
        }
        if let Some(m) = &self.moral {
            if m.ej.len() != self.labels.len() || m.tau_plus.len() != self.labels.len() {
                return Err(Error::LengthMismatch {
                    left: m.ej.len().min(m.tau_plus.len()),
                    right: self.labels.len(),
                });
            }
        }
        Ok(())
    }

    /// Weight of row `i` (1 when no weights were given).
    pub(crate) fn weight(&self, i: usize) -> f64 {
        self.weights.map_or(1.0, |w| w[i])
    }
}

/// Family-specific learned parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    Logistic(LogisticParams),
    NaiveBayes(NaiveBayesParams),
    Forest(ForestParams),
    Svm(SvmParams),
    Neural(NeuralParams),
}

/// A trained classifier plus everything needed to audit the run.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub family: ModelFamily,
    pub params: ModelParams,
    pub config: TrainConfig,
    pub n_features: usize,
    /// Mean training loss per epoch (empty for closed-form fits).
    pub loss_trace: Vec<f64>,
}

impl FittedModel {
    /// Probabilities for the positive class, one per row.
    pub fn predict_proba(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        for (i, row) in rows.iter().enumerate() {
            if row.len() != self.n_features {
                return Err(Error::validation(
                    "feature arity",
                    format!(
                        "row {i} has {} features but the model was trained on {}",
                        row.len(),
                        self.n_features
                    ),
                ));
            }
        }
        let probs = match &self.params {
            ModelParams::Logistic(p) => p.predict_proba(rows),
            ModelParams::NaiveBayes(p) => p.predict_proba(rows),
            ModelParams::Forest(p) => p.predict_proba(rows),
            ModelParams::Svm(p) => p.predict_proba(rows),
            ModelParams::Neural(p) => p.predict_proba(rows),
        };
        debug_assert!(probs.iter().all(|p| (0.0..=1.0).contains(p)));
        Ok(probs)
    }

    /// Hard labels: `1[p >= 0.5]`.
    pub fn predict_labels(&self, rows: &[Vec<f64>]) -> Result<Vec<u8>> {
        Ok(self
            .predict_proba(rows)?
            .into_iter()
            .map(|p| u8::from(p >= 0.5))
            .collect())
    }
}

/// Trains one family on the given inputs.
///
/// The composite loss (`cfg.lambda > 0`) is a neural-only capability:
/// requesting it for another family is a training error, as is omitting
/// the moral context it needs.
pub fn fit(family: ModelFamily, inputs: ModelInputs<'_>, cfg: &TrainConfig) -> Result<FittedModel> {
    cfg.validate()?;
    inputs.validate()?;
    if cfg.lambda > 0.0 {
        if family != ModelFamily::NeuralNet {
            return Err(Error::Training(format!(
                "lambda = {} requires the composite loss, which only the \
                 neural_net family implements (got {family})",
                cfg.lambda
            )));
        }
        if inputs.moral.is_none() {
            return Err(Error::Training(
                "composite loss requires judgment scores and thresholds \
                 (moral context) for every training row"
                    .into(),
            ));
        }
    }
    let n_features = inputs.n_features();
    let (params, loss_trace) = match family {
        ModelFamily::LogisticRegression => logistic::fit(&inputs, cfg)?,
        ModelFamily::GaussianNaiveBayes => naive_bayes::fit(&inputs, cfg)?,
        ModelFamily::RandomForest => forest::fit(&inputs, cfg)?,
        ModelFamily::LinearSvm => svm::fit(&inputs, cfg)?,
        ModelFamily::NeuralNet => neural::fit(&inputs, cfg)?,
    };
    Ok(FittedModel {
        family,
        params,
        config: cfg.clone(),
        n_features,
        loss_trace,
    })
}

/// Convenience wrapper selecting the label column of an annotated dataset.
pub fn fit_dataset(
    family: ModelFamily,
    data: &AnnotatedDataset,
    target: Target,
    weights: Option<&[f64]>,
    cfg: &TrainConfig,
) -> Result<FittedModel> {
    let mut inputs = ModelInputs::from_dataset(data, target);
    if let Some(w) = weights {
        inputs = inputs.with_weights(w);
    }
    fit(family, inputs, cfg)
}

/// Probabilities are clamped into `[1e-7, 1 - 1e-7]` before the logs so a
/// confidently wrong prediction stays finite.
pub const PROB_CLAMP: f64 = 1e-7;

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mean binary cross-entropy of probabilities against 0/1 labels.
pub fn bce_loss(y: &[u8], y_hat: &[f64]) -> Result<f64> {
    if y.len() != y_hat.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: y_hat.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::validation("labels", "must be nonempty"));
    }
    if let Some(&bad) = y.iter().find(|&&v| v > 1) {
        return Err(Error::validation(
            "labels",
            format!("must be 0 or 1, got {bad}"),
        ));
    }
    let n = y.len() as f64;
    let mut total = 0.0;
    for (&yi, &pi) in y.iter().zip(y_hat) {
        let p = pi.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
        total -= if yi == 1 { p.ln() } else { (1.0 - p).ln() };
    }
    Ok(total / n)
}

/// Cross-entropy plus `lambda` times the expected moral shortfall of the
/// prediction-coupled risks; `lambda = 0` skips the risk path entirely
/// and equals [`bce_loss`] bit-exactly.
pub fn composite_loss(
    y: &[u8],
    y_hat: &[f64],
    ej: &[f64],
    tau_plus: &[f64],
    lambda: f64,
    theta: TailFraction,
) -> Result<f64> {
    let bce = bce_loss(y, y_hat)?;
    if lambda == 0.0 {
        return Ok(bce);
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::validation(
            "lambda",
            format!("must be finite and >= 0, got {lambda}"),
        ));
    }
    if ej.len() != y.len() || tau_plus.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: ej.len().min(tau_plus.len()),
            right: y.len(),
        });
    }
    let risks = y_hat
        .iter()
        .zip(ej.iter().zip(tau_plus))
        .map(|(&p, (&e, &t))| moral_risk(p, e, t))
        .collect::<Result<Vec<f64>>>()?;
    Ok(bce + lambda * ems(&risks, theta)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_inputs() -> (Vec<Vec<f64>>, Vec<u8>) {
        // Linearly separable in the first coordinate.
        let features = (0..20)
            .map(|i| {
                let x = i as f64 / 19.0;
                vec![x, (i % 3) as f64 / 2.0]
            })
            .collect::<Vec<_>>();
        let labels = (0..20).map(|i| u8::from(i >= 10)).collect();
        (features, labels)
    }

    #[test]
    fn bce_single_half_probability_is_ln_two() {
        let v = bce_loss(&[1], &[0.5]).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((v - 0.693147).abs() < 1e-6);
    }

    #[test]
    fn bce_perfect_prediction_is_tiny() {
        let v = bce_loss(&[0, 1, 1], &[0.0, 1.0, 1.0]).unwrap();
        assert!(v >= 0.0 && v <= 1e-6);
    }

    #[test]
    fn bce_symmetric_pair_is_ln_two() {
        let v = bce_loss(&[0, 1], &[0.5, 0.5]).unwrap();
        assert!((v - 0.693147).abs() < 1e-6);
    }

    #[test]
    fn bce_rejects_length_mismatch_and_bad_labels() {
        assert!(matches!(
            bce_loss(&[1, 0], &[0.5]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(bce_loss(&[2], &[0.5]).is_err());
    }

    #[test]
    fn composite_with_zero_lambda_is_bce_exactly() {
        let y = [1u8, 0, 1];
        let p = [0.8, 0.3, 0.6];
        let ej = [0.5, -0.2, 0.1];
        let tau = [0.2, 0.2, 0.2];
        let a = composite_loss(&y, &p, &ej, &tau, 0.0, TailFraction::new(0.5).unwrap()).unwrap();
        let b = bce_loss(&y, &p).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn composite_with_aligned_predictions_is_bce() {
        // yhat = 1 where ej > tau, yhat = 0 where ej < tau: every risk is 0.
        let y = [1u8, 0];
        let p = [1.0, 0.0];
        let ej = [0.5, -0.5];
        let tau = [0.2, 0.2];
        let a = composite_loss(&y, &p, &ej, &tau, 3.0, TailFraction::FULL).unwrap();
        let b = bce_loss(&y, &p).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn composite_hand_example_single_sample() {
        // risk = yhat * (tau - ej) = 0.5 * 0.2 = 0.1; theta = 1 -> mean.
        let v = composite_loss(&[1], &[0.5], &[0.0], &[0.2], 1.0, TailFraction::FULL).unwrap();
        assert!((v - 0.793147).abs() < 1e-6);
    }

    #[test]
    fn family_names_round_trip() {
        for family in ModelFamily::ALL {
            assert_eq!(ModelFamily::parse(family.name()).unwrap(), family);
        }
        assert_eq!(
            ModelFamily::parse("RF").unwrap(),
            ModelFamily::RandomForest
        );
        assert!(ModelFamily::parse("boosted_stump").is_err());
    }

    #[test]
    fn train_config_defaults_validate() {
        for family in ModelFamily::ALL {
            TrainConfig::default_for(family).validate().unwrap();
        }
    }

    #[test]
    fn train_config_rejects_out_of_range() {
        let mut cfg = TrainConfig::default_for(ModelFamily::LogisticRegression);
        cfg.learning_rate = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = TrainConfig::default_for(ModelFamily::NeuralNet);
        cfg.lambda = -1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = TrainConfig::default_for(ModelFamily::NeuralNet);
        cfg.batch_size = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn fit_rejects_lambda_on_non_neural_families() {
        let (features, labels) = toy_inputs();
        let mut cfg = TrainConfig::default_for(ModelFamily::LogisticRegression);
        cfg.lambda = 1.0;
        let err = fit(
            ModelFamily::LogisticRegression,
            ModelInputs::new(&features, &labels),
            &cfg,
        )
        .unwrap_err();
        assert!(err.to_string().contains("neural_net"));
    }

    #[test]
    fn fit_rejects_lambda_without_moral_context() {
        let (features, labels) = toy_inputs();
        let mut cfg = TrainConfig::default_for(ModelFamily::NeuralNet);
        cfg.lambda = 1.0;
        let err = fit(
            ModelFamily::NeuralNet,
            ModelInputs::new(&features, &labels),
            &cfg,
        )
        .unwrap_err();
        assert!(err.to_string().contains("moral context"));
    }

    #[test]
    fn inputs_validation_catches_shape_problems() {
        let features = vec![vec![0.0, 1.0], vec![1.0]];
        let labels = vec![0u8, 1];
        assert!(ModelInputs::new(&features, &labels).validate().is_err());

        let features = vec![vec![0.0], vec![f64::NAN]];
        assert!(ModelInputs::new(&features, &labels).validate().is_err());

        let features = vec![vec![0.0], vec![1.0]];
        let weights = vec![-1.0, 1.0];
        assert!(ModelInputs::new(&features, &labels)
            .with_weights(&weights)
            .validate()
            .is_err());

        let zero = vec![0.0, 0.0];
        assert!(ModelInputs::new(&features, &labels)
            .with_weights(&zero)
            .validate()
            .is_err());
    }

    #[test]
    fn every_family_fits_and_predicts_in_range() {
        let (features, labels) = toy_inputs();
        for family in ModelFamily::ALL {
            let cfg = TrainConfig::default_for(family);
            let model = fit(family, ModelInputs::new(&features, &labels), &cfg).unwrap();
            let probs = model.predict_proba(&features).unwrap();
            assert_eq!(probs.len(), labels.len());
            assert!(probs.iter().all(|p| (0.0..=1.0).contains(p)), "{family}");
            let hard = model.predict_labels(&features).unwrap();
            assert!(hard.iter().all(|&h| h <= 1));
        }
    }

    #[test]
    fn every_family_is_deterministic_given_seed() {
        let (features, labels) = toy_inputs();
        for family in ModelFamily::ALL {
            let cfg = TrainConfig::default_for(family);
            let a = fit(family, ModelInputs::new(&features, &labels), &cfg).unwrap();
            let b = fit(family, ModelInputs::new(&features, &labels), &cfg).unwrap();
            assert_eq!(a, b, "{family} must be bit-deterministic");
            assert_eq!(
                a.predict_proba(&features).unwrap(),
                b.predict_proba(&features).unwrap()
            );
        }
    }

    #[test]
    fn predict_rejects_arity_mismatch() {
        let (features, labels) = toy_inputs();
        let cfg = TrainConfig::default_for(ModelFamily::LogisticRegression);
        let model = fit(
            ModelFamily::LogisticRegression,
            ModelInputs::new(&features, &labels),
            &cfg,
        )
        .unwrap();
        let bad = vec![vec![0.1, 0.2, 0.3]];
        assert!(model.predict_proba(&bad).is_err());
    }
}
