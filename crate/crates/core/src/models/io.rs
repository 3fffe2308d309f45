//! Versioned, self-describing text format for fitted models.
//!
//! Layout: a magic/version line, the family tag, feature arity, the
//! training configuration, the loss trace, then family-specific
//! parameter sections, closed by `end`. Every float is written with
//! Rust's shortest round-tripping decimal form, so `save` followed by
//! `load` reproduces the model bit for bit and a re-save is
//! byte-identical.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::models::forest::{ForestParams, Tree, TreeNode};
use crate::models::neural::{DenseLayer, NeuralParams};
use crate::models::{
    FittedModel, LogisticParams, ModelFamily, ModelParams, NaiveBayesParams, SvmParams,
    TrainConfig,
};
use crate::risk::TailFraction;

const MAGIC: &str = "ems-model v1";

/// Serializes a fitted model to the versioned text form.
pub fn to_text(model: &FittedModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "family {}", model.family.name());
    let _ = writeln!(out, "n_features {}", model.n_features);
    let c = &model.config;
    let _ = writeln!(
        out,
        "config epochs={} learning_rate={} batch_size={} seed={} lambda={} theta={} l2={}",
        c.epochs,
        c.learning_rate,
        c.batch_size,
        c.seed,
        c.lambda,
        c.theta.get(),
        c.l2
    );
    let _ = write!(out, "loss_trace");
    for v in &model.loss_trace {
        let _ = write!(out, " {v}");
    }
    out.push('\n');
    match &model.params {
        ModelParams::Logistic(p) => {
            let _ = writeln!(out, "params logistic");
            let _ = writeln!(out, "weights{}", join(&p.weights));
            let _ = writeln!(out, "bias {}", p.bias);
        }
        ModelParams::NaiveBayes(p) => {
            let _ = writeln!(out, "params naive_bayes");
            let _ = writeln!(out, "priors {} {}", p.priors[0], p.priors[1]);
            let _ = writeln!(out, "mean0{}", join(&p.means[0]));
            let _ = writeln!(out, "mean1{}", join(&p.means[1]));
            let _ = writeln!(out, "var0{}", join(&p.variances[0]));
            let _ = writeln!(out, "var1{}", join(&p.variances[1]));
        }
        ModelParams::Forest(p) => {
            let _ = writeln!(out, "params forest");
            let _ = writeln!(out, "trees {}", p.trees.len());
            for tree in &p.trees {
                let _ = writeln!(out, "tree {}", tree.nodes.len());
                for node in &tree.nodes {
                    match node {
                        TreeNode::Split {
                            feature,
                            threshold,
                            left,
                            right,
                        } => {
                            let _ = writeln!(out, "split {feature} {threshold} {left} {right}");
                        }
                        TreeNode::Leaf { vote } => {
                            let _ = writeln!(out, "leaf {vote}");
                        }
                    }
                }
            }
        }
        ModelParams::Svm(p) => {
            let _ = writeln!(out, "params svm");
            let _ = writeln!(out, "weights{}", join(&p.weights));
            let _ = writeln!(out, "bias {}", p.bias);
            let _ = writeln!(out, "link_slope {}", p.link_slope);
            let _ = writeln!(out, "link_intercept {}", p.link_intercept);
        }
        ModelParams::Neural(p) => {
            let _ = writeln!(out, "params neural");
            let _ = writeln!(out, "layers {}", p.layers.len());
            for layer in &p.layers {
                let _ = writeln!(out, "layer {} {}", layer.in_dim, layer.out_dim);
                let _ = writeln!(out, "w{}", join(&layer.weights));
                let _ = writeln!(out, "b{}", join(&layer.biases));
            }
        }
    }
    out.push_str("end\n");
    out
}

pub fn save(model: &FittedModel, path: &Path) -> Result<()> {
    std::fs::write(path, to_text(model))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<FittedModel> {
    from_text(&std::fs::read_to_string(path)?)
}

/// Parses the versioned text form back into a fitted model.
pub fn from_text(text: &str) -> Result<FittedModel> {
    let mut lines = Lines {
        inner: text.lines(),
        at: 0,
    };
    let magic = lines.next_line()?;
    if magic != MAGIC {
        return Err(Error::ModelFormat(format!(
            "expected header {MAGIC:?}, found {magic:?}"
        )));
    }
    let family = ModelFamily::parse(lines.field("family")?)?;
    let n_features: usize = lines.parse_field("n_features")?;

    let config_line = lines.field("config")?.to_string();
    let mut cfg = TrainConfig {
        epochs: 0,
        learning_rate: 0.0,
        batch_size: 0,
        seed: 0,
        lambda: 0.0,
        theta: TailFraction::FULL,
        l2: 0.0,
    };
    for pair in config_line.split_whitespace() {
        let (key, value) = pair.split_once('=').ok_or_else(|| {
            Error::ModelFormat(format!("config entry {pair:?} is not key=value"))
        })?;
        match key {
            "epochs" => cfg.epochs = parse_num(key, value)?,
            "learning_rate" => cfg.learning_rate = parse_num(key, value)?,
            "batch_size" => cfg.batch_size = parse_num(key, value)?,
            "seed" => cfg.seed = parse_num(key, value)?,
            "lambda" => cfg.lambda = parse_num(key, value)?,
            "theta" => cfg.theta = TailFraction::new(parse_num(key, value)?)?,
            "l2" => cfg.l2 = parse_num(key, value)?,
            other => {
                return Err(Error::ModelFormat(format!("unknown config key {other:?}")));
            }
        }
    }
    cfg.validate()?;

    let trace_line = lines.field("loss_trace")?.to_string();
    let loss_trace = parse_floats(&trace_line)?;

    let params_kind = lines.field("params")?.to_string();
    let params = match params_kind.as_str() {
        "logistic" => ModelParams::Logistic(LogisticParams {
            weights: parse_floats(lines.field("weights")?)?,
            bias: lines.parse_field("bias")?,
        }),
        "naive_bayes" => {
            let priors_vec = parse_floats(lines.field("priors")?)?;
            if priors_vec.len() != 2 {
                return Err(Error::ModelFormat("priors needs two values".into()));
            }
            ModelParams::NaiveBayes(NaiveBayesParams {
                priors: [priors_vec[0], priors_vec[1]],
                means: [
                    parse_floats(lines.field("mean0")?)?,
                    parse_floats(lines.field("mean1")?)?,
                ],
                variances: [
                    parse_floats(lines.field("var0")?)?,
                    parse_floats(lines.field("var1")?)?,
                ],
            })
        }
        "forest" => {
            let n_trees: usize = lines.parse_field("trees")?;
            let mut trees = Vec::with_capacity(n_trees);
            for _ in 0..n_trees {
                let n_nodes: usize = lines.parse_field("tree")?;
                let mut nodes = Vec::with_capacity(n_nodes);
                for _ in 0..n_nodes {
                    let line = lines.next_line()?;
                    let mut parts = line.split_whitespace();
                    match parts.next() {
                        Some("split") => {
                            let mut take = |what| -> Result<&str> {
                                parts.next().ok_or_else(|| {
                                    Error::ModelFormat(format!("split node missing {what}"))
                                })
                            };
                            nodes.push(TreeNode::Split {
                                feature: parse_num("feature", take("feature")?)?,
                                threshold: parse_num("threshold", take("threshold")?)?,
                                left: parse_num("left", take("left")?)?,
                                right: parse_num("right", take("right")?)?,
                            });
                        }
                        Some("leaf") => {
                            let vote = parts.next().ok_or_else(|| {
                                Error::ModelFormat("leaf node missing vote".into())
                            })?;
                            nodes.push(TreeNode::Leaf {
                                vote: parse_num("vote", vote)?,
                            });
                        }
                        other => {
                            return Err(Error::ModelFormat(format!(
                                "expected split/leaf node, found {other:?}"
                            )));
                        }
                    }
                }
                trees.push(Tree { nodes });
            }
            ModelParams::Forest(ForestParams { trees })
        }
        "svm" => ModelParams::Svm(SvmParams {
            weights: parse_floats(lines.field("weights")?)?,
            bias: lines.parse_field("bias")?,
            link_slope: lines.parse_field("link_slope")?,
            link_intercept: lines.parse_field("link_intercept")?,
        }),
        "neural" => {
            let n_layers: usize = lines.parse_field("layers")?;
            let mut layers = Vec::with_capacity(n_layers);
            for _ in 0..n_layers {
                let dims = lines.field("layer")?.to_string();
                let mut parts = dims.split_whitespace();
                let in_dim: usize =
                    parse_num("layer in_dim", parts.next().unwrap_or_default())?;
                let out_dim: usize =
                    parse_num("layer out_dim", parts.next().unwrap_or_default())?;
                let weights = parse_floats(lines.field("w")?)?;
                let biases = parse_floats(lines.field("b")?)?;
                if weights.len() != in_dim * out_dim || biases.len() != out_dim {
                    return Err(Error::ModelFormat(format!(
                        "layer {in_dim}x{out_dim} has {} weights and {} biases",
                        weights.len(),
                        biases.len()
                    )));
                }
                layers.push(DenseLayer {
                    in_dim,
                    out_dim,
                    weights,
                    biases,
                });
            }
            ModelParams::Neural(NeuralParams { layers })
        }
        other => {
            return Err(Error::ModelFormat(format!(
                "unknown params section {other:?}"
            )));
        }
    };
    let end = lines.next_line()?;
    if end != "end" {
        return Err(Error::ModelFormat(format!(
            "expected trailing \"end\", found {end:?}"
        )));
    }

    let tag_matches = matches!(
        (family, &params),
        (ModelFamily::LogisticRegression, ModelParams::Logistic(_))
            | (ModelFamily::GaussianNaiveBayes, ModelParams::NaiveBayes(_))
            | (ModelFamily::RandomForest, ModelParams::Forest(_))
            | (ModelFamily::LinearSvm, ModelParams::Svm(_))
            | (ModelFamily::NeuralNet, ModelParams::Neural(_))
    );
    if !tag_matches {
        return Err(Error::ModelFormat(format!(
            "family tag {family} does not match the params section"
        )));
    }
    Ok(FittedModel {
        family,
        params,
        config: cfg,
        n_features,
        loss_trace,
    })
}

struct Lines<'a> {
    inner: std::str::Lines<'a>,
    at: usize,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Result<&'a str> {
        self.at += 1;
        self.inner
            .next()
            .ok_or_else(|| Error::ModelFormat(format!("unexpected end of file at line {}", self.at)))
    }

    /// Next line must start with `key`; returns the rest.
    fn field(&mut self, key: &str) -> Result<&'a str> {
        let at = self.at + 1;
        let line = self.next_line()?;
        if line == key {
            return Ok("");
        }
        line.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(' '))
            .ok_or_else(|| {
                Error::ModelFormat(format!("line {at}: expected {key:?}, found {line:?}"))
            })
    }

    fn parse_field<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let raw = self.field(key)?;
        parse_num(key, raw)
    }
}

fn parse_num<T: FromStr>(what: &str, raw: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| Error::ModelFormat(format!("cannot parse {what} from {raw:?}")))
}

fn parse_floats(raw: &str) -> Result<Vec<f64>> {
    raw.split_whitespace()
        .map(|tok| parse_num("float list", tok))
        .collect()
}

fn join(values: &[f64]) -> String {
    let mut s = String::new();
    for v in values {
        let _ = write!(s, " {v}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{fit, ModelInputs};

    fn toy() -> (Vec<Vec<f64>>, Vec<u8>) {
        let features = (0..24)
            .map(|i| {
                let t = i as f64 / 23.0;
                vec![t, (1.0 - t) * 0.7, (i % 5) as f64 / 4.0]
            })
            .collect::<Vec<_>>();
        let labels = (0..24).map(|i| u8::from(i % 2 == 0)).collect();
        (features, labels)
    }

    #[test]
    fn every_family_round_trips_exactly() {
        let (features, labels) = toy();
        let dir = tempfile::tempdir().unwrap();
        for family in ModelFamily::ALL {
            let mut cfg = TrainConfig::default_for(family);
            cfg.epochs = cfg.epochs.min(30);
            let model = fit(family, ModelInputs::new(&features, &labels), &cfg).unwrap();
            let path = dir.path().join(format!("{family}.model"));
            save(&model, &path).unwrap();
            let loaded = load(&path).unwrap();
            assert_eq!(model, loaded, "{family} must round-trip bit-exactly");
            // Re-serialization is byte-identical.
            assert_eq!(to_text(&model), to_text(&loaded));
            // And the loaded model predicts identically.
            assert_eq!(
                model.predict_proba(&features).unwrap(),
                loaded.predict_proba(&features).unwrap()
            );
        }
    }

    #[test]
    fn rejects_wrong_magic() {
        let err = from_text("im-a-model v9\n").unwrap_err();
        assert!(matches!(err, Error::ModelFormat(_)));
        assert!(err.to_string().contains("ems-model"));
    }

    #[test]
    fn rejects_mismatched_family_tag() {
        let (features, labels) = toy();
        let cfg = TrainConfig::default_for(ModelFamily::LogisticRegression);
        let model = fit(
            ModelFamily::LogisticRegression,
            ModelInputs::new(&features, &labels),
            &cfg,
        )
        .unwrap();
        let text = to_text(&model).replace("family logistic_regression", "family linear_svm");
        let err = from_text(&text).unwrap_err();
        assert!(err.to_string().contains("does not match"));
    }

    #[test]
    fn rejects_truncated_file() {
        let (features, labels) = toy();
        let cfg = TrainConfig::default_for(ModelFamily::NeuralNet);
        let model = fit(
            ModelFamily::NeuralNet,
            ModelInputs::new(&features, &labels),
            &cfg,
        )
        .unwrap();
        let text = to_text(&model);
        let cut = text.len() / 2;
        let err = from_text(&text[..cut]).unwrap_err();
        assert!(matches!(err, Error::ModelFormat(_)));
    }

    #[test]
    fn rejects_unknown_config_keys() {
        let text = format!(
            "{MAGIC}\nfamily logistic_regression\nn_features 1\n\
             config epochs=1 learning_rate=0.1 batch_size=1 seed=0 lambda=0 theta=1 l2=0 extra=5\n"
        );
        let err = from_text(&text).unwrap_err();
        assert!(err.to_string().contains("extra"));
    }
}
