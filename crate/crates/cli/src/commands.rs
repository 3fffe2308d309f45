//! One function per subcommand, all returning `anyhow::Result` so the
//! binary can map error kinds onto exit codes in a single place.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use sha2::{Digest, Sha256};

use ems_core::data::mapping::{annotate, split, AnnotatedDataset};
use ems_core::data::{load_csv, oversample_minority, synth, Schema};
use ems_core::harness::{self, report, run_matrix, SweepAxis};
use ems_core::models::{fit_dataset, io as model_io, Target};

use crate::config::{validate_theta_grid, Resolved};

/// Writes both bundled synthetic tables (or one of them) as CSV files.
pub fn gen_data(schema: Option<Schema>, seed: u64, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;
    let targets: Vec<Schema> = match schema {
        Some(s) => vec![s],
        None => vec![Schema::Admissions, Schema::Loans],
    };
    for schema in targets {
        let table = synth::gen_standard(schema, seed)?;
        let path = out_dir.join(format!("{}.csv", schema.name()));
        fs::write(&path, table.to_csv())
            .with_context(|| format!("cannot write {}", path.display()))?;
        println!("wrote {} ({} rows)", path.display(), table.n_rows());
    }
    Ok(())
}

/// Raw table plus the digest of the file it came from.
struct Loaded {
    data: AnnotatedDataset,
    digest: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    let mut hex = String::with_capacity(64);
    for byte in hash {
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}

/// Reads, optionally rebalances, and annotates the configured dataset.
fn load_annotated(resolved: &Resolved) -> Result<Loaded> {
    let bytes = fs::read(&resolved.dataset_path).with_context(|| {
        format!(
            "cannot read dataset {}",
            resolved.dataset_path.display()
        )
    })?;
    let digest = sha256_hex(&bytes);
    let table = load_csv(&resolved.dataset_path, resolved.schema)?;
    let data = if let Some(floor) = resolved.oversample_floor {
        let labels = table.binary_labels()?;
        let (balanced, _) =
            oversample_minority(&table, &labels, floor, resolved.mapping.seed)?;
        annotate(&balanced, &resolved.mapping)?
    } else {
        annotate(&table, &resolved.mapping)?
    };
    Ok(Loaded { data, digest })
}

fn train_test(
    resolved: &Resolved,
    data: &AnnotatedDataset,
) -> Result<(AnnotatedDataset, AnnotatedDataset)> {
    Ok(split(
        data,
        resolved.mapping.split_fraction,
        resolved.mapping.seed,
    )?)
}

fn snapshot_path(resolved: &Resolved) -> PathBuf {
    resolved
        .out_dir
        .join(format!("{}_snapshot.txt", resolved.schema.name()))
}

/// Everything needed to reproduce a run against this dataset.
fn snapshot_text(resolved: &Resolved, loaded: &Loaded) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "dataset_path={}", resolved.dataset_path.display());
    let _ = writeln!(s, "dataset_sha256={}", loaded.digest);
    let _ = writeln!(s, "rows={}", loaded.data.n_rows());
    let _ = writeln!(s, "schema={}", resolved.schema.name());
    if let Some(floor) = resolved.oversample_floor {
        let _ = writeln!(s, "oversample_floor={floor}");
    }
    let _ = writeln!(s, "master_seed={}", resolved.matrix.master_seed);
    s.push_str(&resolved.mapping.snapshot());
    s
}

/// Results files carry the dataset identity and mapping defaults as
/// comments so each one reproduces on its own.
fn reproduction_comments(resolved: &Resolved, digest: &str, markdown: bool) -> String {
    let mut s = String::new();
    let mut lines = vec![
        format!("dataset_path={}", resolved.dataset_path.display()),
        format!("dataset_sha256={digest}"),
    ];
    if let Some(floor) = resolved.oversample_floor {
        lines.push(format!("oversample_floor={floor}"));
    }
    lines.extend(
        resolved
            .mapping
            .snapshot()
            .lines()
            .map(|l| format!("mapping.{l}")),
    );
    for line in lines {
        if markdown {
            let _ = writeln!(s, "<!-- {line} -->");
        } else {
            let _ = writeln!(s, "# {line}");
        }
    }
    s
}

/// Keeps the prepare-time snapshot as the drift baseline, but makes
/// sure a fresh output directory still records one.
fn ensure_snapshot(resolved: &Resolved, loaded: &Loaded) -> Result<()> {
    let path = snapshot_path(resolved);
    if !path.exists() {
        fs::create_dir_all(&resolved.out_dir)
            .with_context(|| format!("cannot create {}", resolved.out_dir.display()))?;
        fs::write(&path, snapshot_text(resolved, loaded))?;
    }
    Ok(())
}

fn positive_rate(labels: &[u8]) -> f64 {
    labels.iter().filter(|&&l| l == 1).count() as f64 / labels.len() as f64
}

/// Annotates the dataset and writes both label views plus a snapshot
/// that later runs can check for drift.
pub fn prepare(resolved: &Resolved) -> Result<()> {
    let loaded = load_annotated(resolved)?;
    let data = &loaded.data;
    fs::create_dir_all(&resolved.out_dir)
        .with_context(|| format!("cannot create {}", resolved.out_dir.display()))?;

    let name = resolved.schema.name();
    let original_path = resolved
        .out_dir
        .join(format!("{name}_annotated_original.csv"));
    let moral_path = resolved.out_dir.join(format!("{name}_annotated_moral.csv"));
    fs::write(&original_path, data.to_csv_original())?;
    fs::write(&moral_path, data.to_csv_moral())?;

    let snap_path = snapshot_path(resolved);
    fs::write(&snap_path, snapshot_text(resolved, &loaded))?;

    println!(
        "prepared {name}: {} rows, original positive rate {:.3}, \
         moral positive rate {:.3}, label agreement {:.3}",
        data.n_rows(),
        positive_rate(&data.original_label),
        positive_rate(&data.moral_label),
        data.label_agreement(),
    );
    if data.zero_income_warnings > 0 {
        println!(
            "note: {} rows fell back to the zero-income utility floor",
            data.zero_income_warnings
        );
    }
    for path in [&original_path, &moral_path, &snap_path] {
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Warns when the dataset bytes no longer match what `prepare` saw.
fn check_digest_drift(resolved: &Resolved, digest: &str) {
    let snap_path = snapshot_path(resolved);
    let Ok(text) = fs::read_to_string(&snap_path) else {
        return;
    };
    let Some(recorded) = text
        .lines()
        .find_map(|line| line.strip_prefix("dataset_sha256="))
    else {
        return;
    };
    if recorded != digest {
        eprintln!(
            "warning: {} has changed since {} was written \
             (sha256 {} -> {}); results are not comparable across the change",
            resolved.dataset_path.display(),
            snap_path.display(),
            recorded,
            digest
        );
    }
}

/// Fits one baseline model per requested family on the training split
/// and saves each to a portable text file.
pub fn train(resolved: &Resolved) -> Result<()> {
    let loaded = load_annotated(resolved)?;
    check_digest_drift(resolved, &loaded.digest);
    ensure_snapshot(resolved, &loaded)?;
    let (train_split, _) = train_test(resolved, &loaded.data)?;
    fs::create_dir_all(&resolved.out_dir)
        .with_context(|| format!("cannot create {}", resolved.out_dir.display()))?;

    let name = resolved.schema.name();
    for &family in &resolved.matrix.families {
        let mut cfg = resolved
            .matrix
            .train_overrides
            .get(&family)
            .cloned()
            .unwrap_or_else(|| ems_core::models::TrainConfig::default_for(family));
        cfg.seed = harness::cell_seed(
            resolved.matrix.master_seed,
            &format!("{name}/{}/train", family.name()),
        );
        let model = fit_dataset(family, &train_split, Target::Original, None, &cfg)?;
        let path = resolved
            .out_dir
            .join(format!("{name}_{}.model", family.name()));
        model_io::save(&model, &path)?;
        match model.loss_trace.last() {
            Some(loss) => println!(
                "trained {} on {} rows (final loss {loss:.6}); wrote {}",
                family.name(),
                train_split.n_rows(),
                path.display()
            ),
            None => println!(
                "trained {} on {} rows; wrote {}",
                family.name(),
                train_split.n_rows(),
                path.display()
            ),
        }
    }
    Ok(())
}

/// Scores a saved model on the held-out split of the configured dataset.
pub fn evaluate(resolved: &Resolved, model_path: &Path) -> Result<()> {
    let model = model_io::load(model_path)?;
    let loaded = load_annotated(resolved)?;
    check_digest_drift(resolved, &loaded.digest);
    ensure_snapshot(resolved, &loaded)?;
    let (_, test_split) = train_test(resolved, &loaded.data)?;
    let probs = model.predict_proba(&test_split.features)?;
    let metrics = harness::metrics::compute_metrics(
        &test_split.original_label,
        &probs,
        &test_split.moral_label,
    )?;

    println!(
        "model={} family={} test_rows={}",
        model_path.display(),
        model.family.name(),
        test_split.n_rows()
    );
    for (name, value) in ems_core::harness::metrics::Metrics::FIELD_NAMES
        .iter()
        .zip(metrics.fields())
    {
        match value {
            Some(v) => println!("{name}={v}"),
            None => println!("{name}=undefined"),
        }
    }
    Ok(())
}

/// Runs the full technique-by-family matrix and writes the results
/// table as CSV and aligned markdown.
pub fn compare(resolved: &Resolved) -> Result<()> {
    let loaded = load_annotated(resolved)?;
    check_digest_drift(resolved, &loaded.digest);
    ensure_snapshot(resolved, &loaded)?;
    let (train_split, test_split) = train_test(resolved, &loaded.data)?;
    let table = run_matrix(&train_split, &test_split, &resolved.matrix)?;
    if table.rows.is_empty() {
        bail!(
            "the requested families/techniques produce no cells \
             (the tail-loss technique only applies to the neural_net family)"
        );
    }

    fs::create_dir_all(&resolved.out_dir)
        .with_context(|| format!("cannot create {}", resolved.out_dir.display()))?;
    let name = resolved.schema.name();
    let csv_path = resolved.out_dir.join(format!("results_{name}.csv"));
    let md_path = resolved.out_dir.join(format!("results_{name}.md"));
    fs::write(
        &csv_path,
        reproduction_comments(resolved, &loaded.digest, false) + &report::to_csv(&table),
    )?;
    fs::write(
        &md_path,
        reproduction_comments(resolved, &loaded.digest, true) + &report::to_markdown(&table),
    )?;

    let failed: Vec<&harness::MetricsRow> =
        table.rows.iter().filter(|r| r.error.is_some()).collect();
    print!("{}", report::to_markdown(&table));
    println!(
        "{} of {} cells succeeded; wrote {} and {}",
        table.rows.len() - failed.len(),
        table.rows.len(),
        csv_path.display(),
        md_path.display()
    );
    for row in &failed {
        eprintln!(
            "cell failed: family={} technique={}: {}",
            row.family.name(),
            row.technique,
            row.error.as_deref().unwrap_or("unknown")
        );
    }
    if failed.len() == table.rows.len() {
        return Err(ems_core::Error::Training(format!(
            "all {} cells failed; see the rows above",
            table.rows.len()
        ))
        .into());
    }
    Ok(())
}

/// Walks one hyperparameter axis and writes the table plus one small
/// axis-vs-metric CSV per defined metric, ready for plotting.
pub fn sweep(resolved: &Resolved, axis: SweepAxis, grid: &[f64]) -> Result<()> {
    if axis == SweepAxis::Theta {
        validate_theta_grid(grid)?;
    }
    let loaded = load_annotated(resolved)?;
    check_digest_drift(resolved, &loaded.digest);
    ensure_snapshot(resolved, &loaded)?;
    let (train_split, test_split) = train_test(resolved, &loaded.data)?;
    let table = harness::sweep(&train_split, &test_split, &resolved.matrix, axis, grid)?;

    fs::create_dir_all(&resolved.out_dir)
        .with_context(|| format!("cannot create {}", resolved.out_dir.display()))?;
    let name = resolved.schema.name();
    let base = format!("sweep_{name}_{}", axis.name());
    let csv_path = resolved.out_dir.join(format!("{base}.csv"));
    let md_path = resolved.out_dir.join(format!("{base}.md"));
    fs::write(
        &csv_path,
        reproduction_comments(resolved, &loaded.digest, false) + &report::to_csv(&table),
    )?;
    fs::write(
        &md_path,
        reproduction_comments(resolved, &loaded.digest, true) + &report::to_markdown(&table),
    )?;
    println!("wrote {} and {}", csv_path.display(), md_path.display());

    for (metric, contents) in report::sweep_plot_csvs(&table, axis) {
        let path = resolved.out_dir.join(format!("{base}_{metric}.csv"));
        fs::write(&path, contents)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
