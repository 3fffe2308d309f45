//! The competence harness: three techniques for aligning classifiers
//! with moral labels, scored on a shared metric suite over a fixed
//! train/test split.
//!
//! * penalty weights — rows falling short of the moral threshold get
//!   sample weight `1 + kappa * shortfall`; any family accepts them.
//! * hard override — predicted labels are replaced outright by the moral
//!   labels, making the output model-invariant by construction.
//! * tail loss — the neural family trains the composite objective
//!   `BCE + lambda * EMS_theta`, trading label fit against tail risk.
//!
//! Headline metrics always score against the ORIGINAL labels of the
//! held-out split — moral alignment is surfaced separately as
//! `moral_agreement` — so an override row scores exactly as well as the
//! moral labels agree with the originals, while baselines score high.
//! Every matrix cell draws its own RNG seed from the master seed and the
//! cell's identity, so rows are independent of execution order and cell
//! failures are recorded in-row without aborting the run.

pub mod metrics;
pub mod report;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::data::mapping::AnnotatedDataset;
use crate::error::{Error, Result};
use crate::models::{fit_dataset, FittedModel, ModelFamily, Target, TrainConfig};
use crate::risk::TailFraction;

pub use metrics::{compute_metrics, Metrics};

/// Default penalty strength.
pub const DEFAULT_KAPPA: f64 = 5.0;
/// Default composite-loss coefficient for matrix cells.
pub const DEFAULT_LAMBDA: f64 = 5.0;
/// Default tail-fraction grid for the composite-loss rows.
pub const DEFAULT_THETAS: [f64; 3] = [0.05, 0.08, 1.0];

/// A concrete technique instance for one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Technique {
    None,
    PenaltyWeights { kappa: f64 },
    OverrideHard,
    EmsLoss { theta: TailFraction, lambda: f64 },
}

impl Technique {
    pub fn name(&self) -> &'static str {
        match self {
            Technique::None => "baseline",
            Technique::PenaltyWeights { .. } => "penalty_weights",
            Technique::OverrideHard => "override_hard",
            Technique::EmsLoss { .. } => "ems_loss",
        }
    }

    /// The tail loss only pairs with the neural family; everything else
    /// pairs with any family.
    pub fn validate_for(&self, family: ModelFamily) -> Result<()> {
        match self {
            Technique::PenaltyWeights { kappa } if !(kappa.is_finite() && *kappa > 0.0) => {
                Err(Error::validation(
                    "kappa",
                    format!("must be finite and > 0, got {kappa}"),
                ))
            }
            Technique::EmsLoss { lambda, .. } if !(lambda.is_finite() && *lambda >= 0.0) => {
                Err(Error::validation(
                    "lambda",
                    format!("must be finite and >= 0, got {lambda}"),
                ))
            }
            Technique::EmsLoss { .. } if family != ModelFamily::NeuralNet => {
                Err(Error::validation(
                    "technique",
                    format!("ems_loss only pairs with neural_net, got {family}"),
                ))
            }
            _ => Ok(()),
        }
    }

    /// Identity string used for seeding and reporting.
    fn cell_tag(&self) -> String {
        match self {
            Technique::None => "baseline".into(),
            Technique::PenaltyWeights { kappa } => format!("penalty_weights(kappa={kappa})"),
            Technique::OverrideHard => "override_hard".into(),
            Technique::EmsLoss { theta, lambda } => {
                format!("ems_loss(theta={},lambda={lambda})", theta.get())
            }
        }
    }
}

/// Per-sample weights `1 + kappa * shortfall`; rows at or above the
/// moral threshold keep weight 1.
pub fn apply_penalty_weights(data: &AnnotatedDataset, kappa: f64) -> Result<Vec<f64>> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::validation(
            "kappa",
            format!("must be finite and > 0, got {kappa}"),
        ));
    }
    Ok(data.shortfall.iter().map(|s| 1.0 + kappa * s).collect())
}

/// Replaces predictions with the moral labels: the returned
/// probabilities are exactly 0 or 1 and ignore the model entirely.
pub fn apply_override(probs: &[f64], moral_labels: &[u8]) -> Result<Vec<f64>> {
    if probs.len() != moral_labels.len() {
        return Err(Error::LengthMismatch {
            left: probs.len(),
            right: moral_labels.len(),
        });
    }
    Ok(moral_labels.iter().map(|&m| f64::from(m)).collect())
}

/// One scored cell of the experiment matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub family: ModelFamily,
    pub technique: &'static str,
    pub theta: Option<f64>,
    pub lambda: Option<f64>,
    pub kappa: Option<f64>,
    pub metrics: Metrics,
    /// Cell failure, recorded without aborting the run.
    pub error: Option<String>,
}

/// Ordered rows plus everything needed to reproduce them.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultsTable {
    pub dataset: String,
    pub master_seed: u64,
    pub config_snapshot: String,
    pub rows: Vec<MetricsRow>,
}

/// What to run: families, technique groups, and their hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixConfig {
    pub dataset: String,
    pub families: Vec<ModelFamily>,
    pub techniques: Vec<TechniqueKind>,
    pub kappa: f64,
    pub thetas: Vec<f64>,
    pub lambda: f64,
    pub master_seed: u64,
    /// Replaces the per-family training defaults where present; the
    /// seed field is ignored in favor of the derived cell seed.
    pub train_overrides: BTreeMap<ModelFamily, TrainConfig>,
}

/// Technique groups a matrix run can request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TechniqueKind {
    Baseline,
    OverrideHard,
    PenaltyWeights,
    EmsLoss,
}

impl TechniqueKind {
    pub const ALL: [TechniqueKind; 4] = [
        TechniqueKind::Baseline,
        TechniqueKind::OverrideHard,
        TechniqueKind::PenaltyWeights,
        TechniqueKind::EmsLoss,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TechniqueKind::Baseline => "baseline",
            TechniqueKind::OverrideHard => "override_hard",
            TechniqueKind::PenaltyWeights => "penalty_weights",
            TechniqueKind::EmsLoss => "ems_loss",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "baseline" | "none" => Ok(TechniqueKind::Baseline),
            "override_hard" | "override" => Ok(TechniqueKind::OverrideHard),
            "penalty_weights" | "penalty" => Ok(TechniqueKind::PenaltyWeights),
            "ems_loss" | "ems" => Ok(TechniqueKind::EmsLoss),
            other => Err(Error::validation(
                "technique",
                format!(
                    "unknown technique {other:?}; expected baseline, \
                     override_hard/override, penalty_weights/penalty, or ems_loss/ems"
                ),
            )),
        }
    }
}

impl MatrixConfig {
    pub fn new(dataset: impl Into<String>) -> Self {
        MatrixConfig {
            dataset: dataset.into(),
            families: ModelFamily::ALL.to_vec(),
            techniques: TechniqueKind::ALL.to_vec(),
            kappa: DEFAULT_KAPPA,
            thetas: DEFAULT_THETAS.to_vec(),
            lambda: DEFAULT_LAMBDA,
            master_seed: 42,
            train_overrides: BTreeMap::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() {
            return Err(Error::validation("families", "must request at least one"));
        }
        if self.techniques.is_empty() {
            return Err(Error::validation("techniques", "must request at least one"));
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::validation(
                "kappa",
                format!("must be finite and > 0, got {}", self.kappa),
            ));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::validation(
                "lambda",
                format!("must be finite and >= 0, got {}", self.lambda),
            ));
        }
        for &t in &self.thetas {
            TailFraction::new(t)?;
        }
        for cfg in self.train_overrides.values() {
            cfg.validate()?;
        }
        Ok(())
    }

    /// Sorted key=value lines describing the run.
    pub fn snapshot(&self) -> String {
        let mut s = String::new();
        let families = self
            .families
            .iter()
            .map(|f| f.name())
            .collect::<Vec<_>>()
            .join(",");
        let techniques = self
            .techniques
            .iter()
            .map(|t| t.name())
            .collect::<Vec<_>>()
            .join(",");
        let thetas = self
            .thetas
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(s, "dataset={}", self.dataset);
        let _ = writeln!(s, "families={families}");
        let _ = writeln!(s, "kappa={}", self.kappa);
        let _ = writeln!(s, "lambda={}", self.lambda);
        let _ = writeln!(s, "master_seed={}", self.master_seed);
        let _ = writeln!(s, "techniques={techniques}");
        let _ = writeln!(s, "thetas={thetas}");
        for (family, cfg) in &self.train_overrides {
            let _ = writeln!(
                s,
                "train.{}=epochs={} learning_rate={} batch_size={} l2={}",
                family.name(),
                cfg.epochs,
                cfg.learning_rate,
                cfg.batch_size,
                cfg.l2
            );
        }
        s
    }

    fn train_config(&self, family: ModelFamily) -> TrainConfig {
        self.train_overrides
            .get(&family)
            .cloned()
            .unwrap_or_else(|| TrainConfig::default_for(family))
    }
}

/// FNV-1a hash of the master seed and the cell identity: every cell gets
/// an isolated, order-independent RNG stream.
pub fn cell_seed(master_seed: u64, cell_id: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in master_seed
        .to_le_bytes()
        .iter()
        .chain(cell_id.as_bytes().iter())
    {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Fits and scores one (family, technique) cell.
///
/// Training always targets the ORIGINAL labels; techniques interpose
/// through weights, the loss, or the predictions. Metrics come from the
/// held-out split against its original labels, with moral agreement on
/// the side.
pub fn run_cell(
    train: &AnnotatedDataset,
    test: &AnnotatedDataset,
    dataset: &str,
    family: ModelFamily,
    technique: Technique,
    base_cfg: &TrainConfig,
    master_seed: u64,
) -> Result<(Metrics, FittedModel)> {
    technique.validate_for(family)?;
    let mut cfg = base_cfg.clone();
    cfg.seed = cell_seed(
        master_seed,
        &format!("{dataset}/{}/{}", family.name(), technique.cell_tag()),
    );
    let weights = match technique {
        Technique::PenaltyWeights { kappa } => Some(apply_penalty_weights(train, kappa)?),
        _ => None,
    };
    if let Technique::EmsLoss { theta, lambda } = technique {
        cfg.lambda = lambda;
        cfg.theta = theta;
    }
    let model = fit_dataset(family, train, Target::Original, weights.as_deref(), &cfg)?;
    let mut probs = model.predict_proba(&test.features)?;
    if technique == Technique::OverrideHard {
        probs = apply_override(&probs, &test.moral_label)?;
    }
    let metrics = compute_metrics(&test.original_label, &probs, &test.moral_label)?;
    Ok((metrics, model))
}

/// Runs the requested matrix: baselines, overrides, penalties, then the
/// tail-loss grid, in that fixed row order. Cell failures land in the
/// row's `error` field and the run continues.
pub fn run_matrix(
    train: &AnnotatedDataset,
    test: &AnnotatedDataset,
    cfg: &MatrixConfig,
) -> Result<ResultsTable> {
    cfg.validate()?;
    let mut cells: Vec<(ModelFamily, Technique)> = Vec::new();
    for &kind in &cfg.techniques {
        match kind {
            TechniqueKind::Baseline => {
                cells.extend(cfg.families.iter().map(|&f| (f, Technique::None)));
            }
            TechniqueKind::OverrideHard => {
                cells.extend(cfg.families.iter().map(|&f| (f, Technique::OverrideHard)));
            }
            TechniqueKind::PenaltyWeights => {
                cells.extend(cfg.families.iter().map(|&f| {
                    (
                        f,
                        Technique::PenaltyWeights { kappa: cfg.kappa },
                    )
                }));
            }
            TechniqueKind::EmsLoss => {
                if cfg.families.contains(&ModelFamily::NeuralNet) {
                    for &t in &cfg.thetas {
                        cells.push((
                            ModelFamily::NeuralNet,
                            Technique::EmsLoss {
                                theta: TailFraction::new(t)?,
                                lambda: cfg.lambda,
                            },
                        ));
                    }
                }
            }
        }
    }

    let rows = cells
        .into_iter()
        .map(|(family, technique)| {
            let (theta, lambda, kappa) = match technique {
                Technique::EmsLoss { theta, lambda } => (Some(theta.get()), Some(lambda), None),
                Technique::PenaltyWeights { kappa } => (None, None, Some(kappa)),
                _ => (None, None, None),
            };
            let base = cfg.train_config(family);
            match run_cell(
                train,
                test,
                &cfg.dataset,
                family,
                technique,
                &base,
                cfg.master_seed,
            ) {
                Ok((metrics, _)) => MetricsRow {
                    family,
                    technique: technique.name(),
                    theta,
                    lambda,
                    kappa,
                    metrics,
                    error: None,
                },
                Err(e) => MetricsRow {
                    family,
                    technique: technique.name(),
                    theta,
                    lambda,
                    kappa,
                    metrics: Metrics::default(),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    Ok(ResultsTable {
        dataset: cfg.dataset.clone(),
        master_seed: cfg.master_seed,
        config_snapshot: cfg.snapshot(),
        rows,
    })
}

/// Axis a sweep can walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Theta,
    Lambda,
    Kappa,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Theta => "theta",
            SweepAxis::Lambda => "lambda",
            SweepAxis::Kappa => "kappa",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "theta" => Ok(SweepAxis::Theta),
            "lambda" => Ok(SweepAxis::Lambda),
            "kappa" => Ok(SweepAxis::Kappa),
            other => Err(Error::validation(
                "axis",
                format!("unknown sweep axis {other:?}; expected theta, lambda, or kappa"),
            )),
        }
    }
}

/// One row per grid value, all sharing a single per-sweep seed so the
/// axis is the only thing changing. Theta and lambda walk the tail loss
/// on the neural family; kappa walks penalty weights on the forest.
pub fn sweep(
    train: &AnnotatedDataset,
    test: &AnnotatedDataset,
    cfg: &MatrixConfig,
    axis: SweepAxis,
    grid: &[f64],
) -> Result<ResultsTable> {
    cfg.validate()?;
    if grid.is_empty() {
        return Err(Error::validation("grid", "must be nonempty"));
    }
    let family = match axis {
        SweepAxis::Theta | SweepAxis::Lambda => ModelFamily::NeuralNet,
        SweepAxis::Kappa => ModelFamily::RandomForest,
    };
    let seed = cell_seed(
        cfg.master_seed,
        &format!("{}/{}/sweep-{}", cfg.dataset, family.name(), axis.name()),
    );
    let fixed_theta = cfg
        .thetas
        .first()
        .copied()
        .map(TailFraction::new)
        .transpose()?
        .unwrap_or(TailFraction::FULL);

    let mut rows = Vec::with_capacity(grid.len());
    for &value in grid {
        let technique = match axis {
            SweepAxis::Theta => Technique::EmsLoss {
                theta: TailFraction::new(value)?,
                lambda: cfg.lambda,
            },
            SweepAxis::Lambda => {
                if !(value.is_finite() && value >= 0.0) {
                    return Err(Error::validation(
                        "lambda",
                        format!("must be finite and >= 0, got {value}"),
                    ));
                }
                Technique::EmsLoss {
                    theta: fixed_theta,
                    lambda: value,
                }
            }
            SweepAxis::Kappa => Technique::PenaltyWeights { kappa: value },
        };
        technique.validate_for(family)?;
        let mut train_cfg = cfg.train_config(family);
        train_cfg.seed = seed;
        if let Technique::EmsLoss { theta, lambda } = technique {
            train_cfg.lambda = lambda;
            train_cfg.theta = theta;
        }
        let weights = match technique {
            Technique::PenaltyWeights { kappa } => Some(apply_penalty_weights(train, kappa)?),
            _ => None,
        };
        let (theta, lambda, kappa) = match technique {
            Technique::EmsLoss { theta, lambda } => (Some(theta.get()), Some(lambda), None),
            Technique::PenaltyWeights { kappa } => (None, None, Some(kappa)),
            _ => (None, None, None),
        };
        let row = match fit_dataset(family, train, Target::Original, weights.as_deref(), &train_cfg)
            .and_then(|model| model.predict_proba(&test.features))
            .and_then(|probs| compute_metrics(&test.original_label, &probs, &test.moral_label))
        {
            Ok(metrics) => MetricsRow {
                family,
                technique: technique.name(),
                theta,
                lambda,
                kappa,
                metrics,
                error: None,
            },
            Err(e) => MetricsRow {
                family,
                technique: technique.name(),
                theta,
                lambda,
                kappa,
                metrics: Metrics::default(),
                error: Some(e.to_string()),
            },
        };
        rows.push(row);
    }

    Ok(ResultsTable {
        dataset: cfg.dataset.clone(),
        master_seed: cfg.master_seed,
        config_snapshot: format!("{}axis={}\n", cfg.snapshot(), axis.name()),
        rows,
    })
}
