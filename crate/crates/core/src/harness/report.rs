//! Results rendering: machine-readable CSV and an aligned markdown
//! table, both carrying the run's config snapshot as a comment header,
//! plus two-column per-metric CSVs for plotting sweep curves.
//!
//! Metric cells show percentages with two decimals in markdown and raw
//! shortest-round-trip decimals in CSV. Absent metrics render as an
//! empty CSV field or a markdown dash — never as 0.

use std::fmt::Write as _;

use crate::harness::{Metrics, ResultsTable, SweepAxis};

const COLUMNS: [&str; 13] = [
    "dataset",
    "family",
    "technique",
    "theta",
    "lambda",
    "kappa",
    "accuracy",
    "precision",
    "recall",
    "f1",
    "roc_auc",
    "moral_agreement",
    "error",
];

fn opt_plain(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// CSV with `#`-prefixed comment header lines for the config snapshot.
pub fn to_csv(table: &ResultsTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# dataset={}", table.dataset);
    let _ = writeln!(out, "# master_seed={}", table.master_seed);
    for line in table.config_snapshot.lines() {
        let _ = writeln!(out, "# {line}");
    }
    let _ = writeln!(out, "{}", COLUMNS.join(","));
    for row in &table.rows {
        let fields = [
            table.dataset.clone(),
            row.family.name().to_string(),
            row.technique.to_string(),
            opt_plain(row.theta),
            opt_plain(row.lambda),
            opt_plain(row.kappa),
            opt_plain(row.metrics.accuracy),
            opt_plain(row.metrics.precision),
            opt_plain(row.metrics.recall),
            opt_plain(row.metrics.f1),
            opt_plain(row.metrics.roc_auc),
            opt_plain(row.metrics.moral_agreement),
            row.error.clone().unwrap_or_default(),
        ];
        let line = fields
            .iter()
            .map(|f| csv_escape(f))
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(out, "{line}");
    }
    out
}

fn percent(v: Option<f64>) -> String {
    v.map(|x| format!("{:.2}", x * 100.0))
        .unwrap_or_else(|| "-".to_string())
}

fn hyper(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "-".to_string())
}

/// Aligned markdown table; the config snapshot rides in an HTML comment.
pub fn to_markdown(table: &ResultsTable) -> String {
    let header = [
        "Technique",
        "Family",
        "theta",
        "lambda",
        "kappa",
        "Accuracy",
        "Precision",
        "Recall",
        "F1",
        "ROC_AUC",
        "Moral_Agreement",
        "Error",
    ];
    let body: Vec<[String; 12]> = table
        .rows
        .iter()
        .map(|row| {
            [
                row.technique.to_string(),
                row.family.name().to_string(),
                hyper(row.theta),
                hyper(row.lambda),
                hyper(row.kappa),
                percent(row.metrics.accuracy),
                percent(row.metrics.precision),
                percent(row.metrics.recall),
                percent(row.metrics.f1),
                percent(row.metrics.roc_auc),
                percent(row.metrics.moral_agreement),
                row.error.clone().unwrap_or_else(|| "-".to_string()),
            ]
        })
        .collect();

    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<!-- dataset={} master_seed={} -->",
        table.dataset, table.master_seed
    );
    for line in table.config_snapshot.lines() {
        let _ = writeln!(out, "<!-- {line} -->");
    }
    let render = |cells: &[String], out: &mut String| {
        let mut line = String::from("|");
        for (cell, w) in cells.iter().zip(&widths) {
            let _ = write!(line, " {cell:<w$} |");
        }
        out.push_str(&line);
        out.push('\n');
    };
    render(
        &header.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
        &mut out,
    );
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    render(&rule, &mut out);
    for row in &body {
        render(row, &mut out);
    }
    out
}

/// One `(axis value, metric)` CSV per metric, for plotting sweep curves.
/// Rows whose metric is absent are skipped rather than zeroed.
pub fn sweep_plot_csvs(table: &ResultsTable, axis: SweepAxis) -> Vec<(String, String)> {
    Metrics::FIELD_NAMES
        .iter()
        .enumerate()
        .map(|(slot, name)| {
            let mut csv = format!("{},{name}\n", axis.name());
            for row in &table.rows {
                let value = match axis {
                    SweepAxis::Theta => row.theta,
                    SweepAxis::Lambda => row.lambda,
                    SweepAxis::Kappa => row.kappa,
                };
                let (Some(v), Some(m)) = (value, row.metrics.fields()[slot]) else {
                    continue;
                };
                let _ = writeln!(csv, "{v},{m}");
            }
            (name.to_string(), csv)
        })
        .collect()
}
