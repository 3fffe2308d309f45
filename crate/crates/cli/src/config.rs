//! TOML run configuration and its resolution into engine types.
//!
//! The file is strict: unknown keys are rejected by name so a typo never
//! silently falls back to a default. Every section other than `[dataset]`
//! is optional, and every optional key starts from the per-dataset
//! defaults baked into the engine.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use ems_core::data::mapping::MappingConfig;
use ems_core::data::Schema;
use ems_core::ethics::NormativeWeights;
use ems_core::harness::{MatrixConfig, TechniqueKind};
use ems_core::models::{ModelFamily, TrainConfig};
use ems_core::risk::TailFraction;

/// Environment variable consulted for the output directory when neither
/// `--out` nor `run.out_dir` is given.
pub const OUT_DIR_ENV: &str = "EMS_OUT_DIR";

/// Fallback output directory when nothing else names one.
pub const DEFAULT_OUT_DIR: &str = "results";

/// Top-level layout of a run configuration file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub dataset: DatasetSection,
    #[serde(default)]
    pub mapping: MappingSection,
    #[serde(default)]
    pub run: RunSection,
    /// Per-family training overrides, keyed by family name.
    #[serde(default)]
    pub train: BTreeMap<String, TrainSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    /// CSV file holding the raw table.
    pub path: PathBuf,
    /// `admissions` or `loans`.
    pub schema: String,
    /// Optional minority-class floor; when present the raw table is
    /// rebalanced by duplicating minority rows before annotation.
    #[serde(default)]
    pub oversample_floor: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MappingSection {
    /// Preset name (`"uniform"`, `"consequentialist"`, `"principlism"`)
    /// or an explicit `[alpha, beta, gamma]` triple summing to 1.
    pub weights: Option<WeightsSpec>,
    pub tau_default: Option<f64>,
    pub pass_mark: Option<f64>,
    pub penalty_high: Option<f64>,
    pub penalty_low: Option<f64>,
    pub income_split: Option<f64>,
    pub intent_scores: Option<BTreeMap<String, f64>>,
    pub grade_scale: Option<BTreeMap<String, f64>>,
    pub seed: Option<u64>,
    pub split_fraction: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum WeightsSpec {
    Preset(String),
    Triple([f64; 3]),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub master_seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub families: Option<Vec<String>>,
    pub techniques: Option<Vec<String>>,
    pub kappa: Option<f64>,
    pub lambda: Option<f64>,
    pub thetas: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub batch_size: Option<usize>,
    pub l2: Option<f64>,
}

/// Command-line overrides that take precedence over the file.
#[derive(Debug, Default)]
pub struct CliOverrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub families: Option<Vec<String>>,
    pub techniques: Option<Vec<String>>,
}

/// Everything a command needs, fully validated.
#[derive(Debug)]
pub struct Resolved {
    pub schema: Schema,
    pub dataset_path: PathBuf,
    pub oversample_floor: Option<f64>,
    pub mapping: MappingConfig,
    pub matrix: MatrixConfig,
    pub out_dir: PathBuf,
}

pub fn load_file(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let parsed: FileConfig =
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
    Ok(parsed)
}

/// Merges file values over per-dataset defaults, applies command-line
/// overrides, and validates the result. All failures here are
/// configuration errors.
pub fn resolve(file: &FileConfig, cli: &CliOverrides) -> Result<Resolved> {
    let schema = Schema::parse(&file.dataset.schema).context("config key dataset.schema")?;
    if let Some(floor) = file.dataset.oversample_floor {
        if !floor.is_finite() || !(0.0..1.0).contains(&floor) {
            bail!("config key dataset.oversample_floor: must be in [0, 1), got {floor}");
        }
    }

    let mapping = resolve_mapping(schema, &file.mapping)?;
    let matrix = resolve_matrix(schema, file, cli, &mapping)?;

    let out_dir = cli
        .out
        .clone()
        .or_else(|| file.run.out_dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));

    Ok(Resolved {
        schema,
        dataset_path: file.dataset.path.clone(),
        oversample_floor: file.dataset.oversample_floor,
        mapping,
        matrix,
        out_dir,
    })
}

fn resolve_mapping(schema: Schema, section: &MappingSection) -> Result<MappingConfig> {
    let mut cfg = MappingConfig::default_for(schema);
    if let Some(spec) = &section.weights {
        cfg.weights = match spec {
            WeightsSpec::Preset(name) => {
                NormativeWeights::preset(name).context("config key mapping.weights")?
            }
            WeightsSpec::Triple([a, b, g]) => {
                NormativeWeights::new(*a, *b, *g).context("config key mapping.weights")?
            }
        };
    }
    if let Some(v) = section.tau_default {
        cfg.tau_default = v;
    }
    if let Some(v) = section.pass_mark {
        cfg.pass_mark = v;
    }
    if let Some(v) = section.penalty_high {
        cfg.penalty_high = v;
    }
    if let Some(v) = section.penalty_low {
        cfg.penalty_low = v;
    }
    if let Some(v) = section.income_split {
        cfg.income_split = v;
    }
    if let Some(v) = &section.intent_scores {
        cfg.intent_scores = v.clone();
    }
    if let Some(v) = &section.grade_scale {
        cfg.grade_scale = v.clone();
    }
    if let Some(v) = section.seed {
        cfg.seed = v;
    }
    if let Some(v) = section.split_fraction {
        cfg.split_fraction = v;
    }
    cfg.validate().context("config section [mapping]")?;
    Ok(cfg)
}

fn resolve_matrix(
    schema: Schema,
    file: &FileConfig,
    cli: &CliOverrides,
    mapping: &MappingConfig,
) -> Result<MatrixConfig> {
    let mut matrix = MatrixConfig::new(schema.name());

    let family_names = cli.families.as_ref().or(file.run.families.as_ref());
    if let Some(names) = family_names {
        matrix.families = parse_families(names)?;
    }
    let technique_names = cli.techniques.as_ref().or(file.run.techniques.as_ref());
    if let Some(names) = technique_names {
        matrix.techniques = parse_techniques(names)?;
    }
    if let Some(v) = file.run.kappa {
        matrix.kappa = v;
    }
    if let Some(v) = file.run.lambda {
        matrix.lambda = v;
    }
    if let Some(v) = &file.run.thetas {
        matrix.thetas = v.clone();
    }
    matrix.master_seed = cli
        .seed
        .or(file.run.master_seed)
        .unwrap_or(mapping.seed);

    for (name, section) in &file.train {
        let family = ModelFamily::parse(name)
            .with_context(|| format!("config section [train.{name}]"))?;
        let mut cfg = TrainConfig::default_for(family);
        if let Some(v) = section.epochs {
            cfg.epochs = v;
        }
        if let Some(v) = section.learning_rate {
            cfg.learning_rate = v;
        }
        if let Some(v) = section.batch_size {
            cfg.batch_size = v;
        }
        if let Some(v) = section.l2 {
            cfg.l2 = v;
        }
        matrix.train_overrides.insert(family, cfg);
    }

    matrix.validate().context("config section [run]")?;
    Ok(matrix)
}

pub fn parse_families(names: &[String]) -> Result<Vec<ModelFamily>> {
    let mut out = Vec::with_capacity(names.len());
    for name in names {
        let family = ModelFamily::parse(name).context("config key run.families")?;
        if out.contains(&family) {
            return Err(anyhow!(
                "config key run.families: {} requested twice",
                family.name()
            ));
        }
        out.push(family);
    }
    Ok(out)
}

pub fn parse_techniques(names: &[String]) -> Result<Vec<TechniqueKind>> {
    let mut out = Vec::with_capacity(names.len());
    for name in names {
        let kind = TechniqueKind::parse(name).context("config key run.techniques")?;
        if out.contains(&kind) {
            return Err(anyhow!(
                "config key run.techniques: {} requested twice",
                kind.name()
            ));
        }
        out.push(kind);
    }
    Ok(out)
}

/// Parses a sweep grid value list, deferring range checks to the engine
/// except for the tail fraction, whose bounds are validated eagerly so
/// the error points at the command line rather than deep into a run.
pub fn validate_theta_grid(grid: &[f64]) -> Result<()> {
    for &value in grid {
        TailFraction::new(value).context("sweep grid")?;
    }
    Ok(())
}
