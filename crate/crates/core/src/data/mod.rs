//! Tabular data layer: schema-validated CSV ingestion, min-max
//! normalization, minority oversampling, and the moral feature mappings
//! that annotate each row with judgment scores and labels.

pub mod mapping;
pub mod synth;

use std::collections::HashMap;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// The two supported dataset schemas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Schema {
    Admissions,
    Loans,
}

/// Cell type of a source column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

impl Schema {
    /// Required columns in canonical order (features first, target last).
    /// Extra columns in a source file (e.g. a serial number) are ignored.
    pub fn required_columns(&self) -> &'static [(&'static str, ColumnKind)] {
        use ColumnKind::*;
        match self {
            Schema::Admissions => &[
                ("GRE Score", Numeric),
                ("TOEFL Score", Numeric),
                ("University Rating", Numeric),
                ("SOP", Numeric),
                ("LOR", Numeric),
                ("CGPA", Numeric),
                ("Research", Numeric),
                ("Chance of Admit", Numeric),
            ],
            Schema::Loans => &[
                ("person_age", Numeric),
                ("person_income", Numeric),
                ("person_home_ownership", Categorical),
                ("person_emp_length", Numeric),
                ("loan_intent", Categorical),
                ("loan_grade", Categorical),
                ("loan_amnt", Numeric),
                ("loan_int_rate", Numeric),
                ("loan_percent_income", Numeric),
                ("cb_person_default_on_file", Categorical),
                ("cb_person_cred_hist_length", Numeric),
                ("loan_status", Numeric),
            ],
        }
    }

    pub fn target_column(&self) -> &'static str {
        match self {
            Schema::Admissions => "Chance of Admit",
            Schema::Loans => "loan_status",
        }
    }

    pub fn feature_columns(&self) -> Vec<&'static str> {
        self.required_columns()
            .iter()
            .map(|(n, _)| *n)
            .filter(|n| *n != self.target_column())
            .collect()
    }

    pub fn name(&self) -> &'static str {
        match self {
            Schema::Admissions => "admissions",
            Schema::Loans => "loans",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "admissions" => Ok(Schema::Admissions),
            "loans" => Ok(Schema::Loans),
            other => Err(Error::validation(
                "schema",
                format!("unknown schema `{other}` (expected admissions or loans)"),
            )),
        }
    }
}

/// Values of one column.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

impl ColumnData {
    fn len(&self) -> usize {
        match self {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Categorical(v) => v.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

/// A schema-validated table with columns in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    schema: Schema,
    columns: Vec<Column>,
    n_rows: usize,
    /// Rows discarded at load time because a required cell was missing.
    pub dropped_rows: usize,
}

impl RawTable {
    /// Assemble a table from named columns. All required columns of the
    /// schema must be present with matching kinds and equal lengths;
    /// columns are stored in canonical schema order, extras are dropped.
    pub fn from_columns(schema: Schema, columns: Vec<Column>) -> Result<Self> {
        let mut by_name: HashMap<String, Column> =
            columns.into_iter().map(|c| (c.name.clone(), c)).collect();
        let mut ordered = Vec::new();
        for (name, kind) in schema.required_columns() {
            let col = by_name.remove(*name).ok_or_else(|| Error::MissingColumn {
                schema: schema.name().to_string(),
                column: (*name).to_string(),
            })?;
            let actual = match col.data {
                ColumnData::Numeric(_) => ColumnKind::Numeric,
                ColumnData::Categorical(_) => ColumnKind::Categorical,
            };
            if actual != *kind {
                return Err(Error::validation(
                    "column",
                    format!("column `{name}` has the wrong kind for schema {}", schema.name()),
                ));
            }
            ordered.push(col);
        }
        let n_rows = ordered[0].data.len();
        if let Some(c) = ordered.iter().find(|c| c.data.len() != n_rows) {
            return Err(Error::LengthMismatch {
                left: n_rows,
                right: c.data.len(),
            });
        }
        Ok(Self {
            schema,
            columns: ordered,
            n_rows,
            dropped_rows: 0,
        })
    }

    pub fn schema(&self) -> Schema {
        self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::MissingColumn {
                schema: self.schema.name().to_string(),
                column: name.to_string(),
            })
    }

    pub fn numeric(&self, name: &str) -> Result<&[f64]> {
        match &self.column(name)?.data {
            ColumnData::Numeric(v) => Ok(v),
            ColumnData::Categorical(_) => Err(Error::validation(
                "column",
                format!("column `{name}` is categorical, expected numeric"),
            )),
        }
    }

    pub fn categorical(&self, name: &str) -> Result<&[String]> {
        match &self.column(name)?.data {
            ColumnData::Categorical(v) => Ok(v),
            ColumnData::Numeric(_) => Err(Error::validation(
                "column",
                format!("column `{name}` is numeric, expected categorical"),
            )),
        }
    }

    /// New table containing the given rows (indices may repeat).
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.n_rows) {
            return Err(Error::validation(
                "row index",
                format!("index {bad} out of range for {} rows", self.n_rows),
            ));
        }
        let columns = self
            .columns
            .iter()
            .map(|c| Column {
                name: c.name.clone(),
                data: match &c.data {
                    ColumnData::Numeric(v) => {
                        ColumnData::Numeric(indices.iter().map(|&i| v[i]).collect())
                    }
                    ColumnData::Categorical(v) => {
                        ColumnData::Categorical(indices.iter().map(|&i| v[i].clone()).collect())
                    }
                },
            })
            .collect();
        Ok(Self {
            schema: self.schema,
            columns,
            n_rows: indices.len(),
            dropped_rows: 0,
        })
    }

    /// Serialize the table as CSV with the canonical header row.
    /// Floats print in shortest-roundtrip form, so output is byte-stable.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let names: Vec<&str> = self.column_names();
        let _ = writeln!(out, "{}", names.join(","));
        for i in 0..self.n_rows {
            for (j, col) in self.columns.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                match &col.data {
                    ColumnData::Numeric(v) => {
                        let _ = write!(out, "{}", v[i]);
                    }
                    ColumnData::Categorical(v) => out.push_str(&v[i]),
                }
            }
            out.push('\n');
        }
        out
    }

    /// Binary target per row.
    ///
    /// Loans carry a 0/1 status column directly. The admissions target is
    /// a continuous admission chance; it binarizes at the midpoint of the
    /// observed range, which is exactly `>= 0.5` after min-max scaling.
    pub fn binary_labels(&self) -> Result<Vec<u8>> {
        match self.schema {
            Schema::Loans => {
                let status = self.numeric("loan_status")?;
                status
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| {
                        if v == 0.0 {
                            Ok(0)
                        } else if v == 1.0 {
                            Ok(1)
                        } else {
                            Err(Error::Cell {
                                row: i + 1,
                                column: "loan_status".to_string(),
                                message: format!("target must be 0 or 1, got {v}"),
                            })
                        }
                    })
                    .collect()
            }
            Schema::Admissions => {
                let chance = self.numeric("Chance of Admit")?;
                let min = chance.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = chance.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mid = (min + max) / 2.0;
                Ok(chance.iter().map(|&v| u8::from(v >= mid)).collect())
            }
        }
    }
}

fn is_missing(cell: &str) -> bool {
    let t = cell.trim();
    t.is_empty() || t.eq_ignore_ascii_case("na") || t.eq_ignore_ascii_case("nan") || t.eq_ignore_ascii_case("null")
}

/// Parse a CSV file against a schema.
///
/// Headers are trimmed (source files are known to carry stray spaces in
/// column names), required columns are located by exact name, and extra
/// columns are ignored. Rows with missing required cells are dropped and
/// counted in `dropped_rows`; a non-missing cell that fails to parse is a
/// hard error carrying its 1-based data-row index.
pub fn load_csv(path: &Path, schema: Schema) -> Result<RawTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let required = schema.required_columns();
    let mut positions = Vec::with_capacity(required.len());
    for (name, kind) in required {
        let pos = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn {
                schema: schema.name().to_string(),
                column: (*name).to_string(),
            })?;
        positions.push((pos, *name, *kind));
    }

    enum Builder {
        Numeric(Vec<f64>),
        Categorical(Vec<String>),
    }
    let mut builders: Vec<Builder> = positions
        .iter()
        .map(|(_, _, kind)| match kind {
            ColumnKind::Numeric => Builder::Numeric(Vec::new()),
            ColumnKind::Categorical => Builder::Categorical(Vec::new()),
        })
        .collect();

    let mut dropped = 0usize;
    'rows: for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        let row = row_idx + 1;
        // First pass: reject the whole row if any required cell is missing.
        for (pos, _, _) in &positions {
            match record.get(*pos) {
                None => {
                    dropped += 1;
                    continue 'rows;
                }
                Some(cell) if is_missing(cell) => {
                    dropped += 1;
                    continue 'rows;
                }
                Some(_) => {}
            }
        }
        for ((pos, name, _), builder) in positions.iter().zip(builders.iter_mut()) {
            let cell = record.get(*pos).expect("presence checked above");
            match builder {
                Builder::Numeric(v) => {
                    let parsed: f64 = cell.parse().map_err(|_| Error::Cell {
                        row,
                        column: name.to_string(),
                        message: format!("cannot parse `{cell}` as a number"),
                    })?;
                    if !parsed.is_finite() {
                        return Err(Error::Cell {
                            row,
                            column: name.to_string(),
                            message: format!("non-finite value {parsed}"),
                        });
                    }
                    v.push(parsed);
                }
                Builder::Categorical(v) => v.push(cell.to_string()),
            }
        }
    }

    let columns: Vec<Column> = positions
        .iter()
        .zip(builders)
        .map(|((_, name, _), b)| Column {
            name: name.to_string(),
            data: match b {
                Builder::Numeric(v) => ColumnData::Numeric(v),
                Builder::Categorical(v) => ColumnData::Categorical(v),
            },
        })
        .collect();

    if columns[0].data.len() == 0 {
        return Err(Error::Data(format!(
            "{}: no usable rows ({dropped} dropped)",
            path.display()
        )));
    }
    let mut table = RawTable::from_columns(schema, columns)?;
    table.dropped_rows = dropped;
    Ok(table)
}

/// Per-column statistics retained by [`normalize`] for reproducibility.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnStats {
    Numeric { min: f64, max: f64 },
    /// Sorted distinct categories; a category's code is its index.
    Categorical { categories: Vec<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormStats {
    pub columns: Vec<(String, ColumnStats)>,
}

/// Min-max scale every column into `[0, 1]`.
///
/// Numeric columns map through `(x - min) / (max - min)`; constant
/// columns collapse to 0. Categorical columns are integer-encoded by
/// sorted distinct value, then scaled the same way, so the encoding is
/// independent of row order.
pub fn normalize(table: &RawTable) -> Result<(RawTable, NormStats)> {
    let mut out_columns = Vec::with_capacity(table.columns.len());
    let mut stats = Vec::with_capacity(table.columns.len());
    for col in &table.columns {
        match &col.data {
            ColumnData::Numeric(v) => {
                let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let scaled = if min == max {
                    vec![0.0; v.len()]
                } else {
                    v.iter().map(|x| (x - min) / (max - min)).collect()
                };
                out_columns.push(Column {
                    name: col.name.clone(),
                    data: ColumnData::Numeric(scaled),
                });
                stats.push((col.name.clone(), ColumnStats::Numeric { min, max }));
            }
            ColumnData::Categorical(v) => {
                let mut categories: Vec<String> = v.clone();
                categories.sort_unstable();
                categories.dedup();
                let denom = (categories.len() - 1).max(1) as f64;
                let scaled = v
                    .iter()
                    .map(|s| {
                        let idx = categories
                            .binary_search(s)
                            .expect("every value is in its own distinct set");
                        if categories.len() == 1 {
                            0.0
                        } else {
                            idx as f64 / denom
                        }
                    })
                    .collect();
                out_columns.push(Column {
                    name: col.name.clone(),
                    data: ColumnData::Numeric(scaled),
                });
                stats.push((col.name.clone(), ColumnStats::Categorical { categories }));
            }
        }
    }
    Ok((
        RawTable {
            schema: table.schema,
            columns: out_columns,
            n_rows: table.n_rows,
            dropped_rows: table.dropped_rows,
        },
        NormStats { columns: stats },
    ))
}

/// Duplicate minority-class rows (uniformly at random, with replacement)
/// until that class holds at least `floor` of the table.
///
/// Returns the augmented table with its labels. The original rows are
/// always a prefix of the output, so nothing is ever removed. A table
/// whose minority share already meets the floor passes through unchanged.
pub fn oversample_minority(
    table: &RawTable,
    labels: &[u8],
    floor: f64,
    seed: u64,
) -> Result<(RawTable, Vec<u8>)> {
    if labels.len() != table.n_rows() {
        return Err(Error::LengthMismatch {
            left: table.n_rows(),
            right: labels.len(),
        });
    }
    if !(0.0..1.0).contains(&floor) || !floor.is_finite() {
        return Err(Error::validation(
            "balance floor",
            format!("must be in [0, 1), got {floor}"),
        ));
    }
    let positives = labels.iter().filter(|&&l| l == 1).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::Data(
            "cannot oversample a single-class table".to_string(),
        ));
    }
    let (minority_label, minority, majority) = if positives <= negatives {
        (1u8, positives, negatives)
    } else {
        (0u8, negatives, positives)
    };
    if minority as f64 / labels.len() as f64 >= floor {
        return Ok((table.clone(), labels.to_vec()));
    }
    // Smallest m with m / (m + majority) >= floor.
    let target = (floor * majority as f64 / (1.0 - floor)).ceil() as usize;
    let additions = target.saturating_sub(minority);
    let minority_rows: Vec<usize> = labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == minority_label)
        .map(|(i, _)| i)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..table.n_rows()).collect();
    for _ in 0..additions {
        indices.push(minority_rows[rng.gen_range(0..minority_rows.len())]);
    }
    let out_labels: Vec<u8> = indices.iter().map(|&i| labels[i]).collect();
    Ok((table.select_rows(&indices)?, out_labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_temp_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    const ADMISSIONS_CSV: &str = "\
Serial No.,GRE Score,TOEFL Score,University Rating,SOP,LOR ,CGPA,Research,Chance of Admit
1,337,118,4,4.5,4.5,9.65,1,0.92
2,324,107,4,4,4.5,8.87,1,0.76
3,316,104,3,3,3.5,8,1,0.72
4,322,110,3,3.5,2.5,8.67,1,0.8
5,314,103,2,2,3,8.21,0,0.65
";

    #[test]
    fn loads_admissions_with_trailing_space_header() {
        let f = write_temp_csv(ADMISSIONS_CSV);
        let t = load_csv(f.path(), Schema::Admissions).unwrap();
        assert_eq!(t.n_rows(), 5);
        assert_eq!(t.dropped_rows, 0);
        // Serial No. is ignored; canonical order puts the target last.
        assert_eq!(t.column_names().last().unwrap(), &"Chance of Admit");
        assert_eq!(t.numeric("GRE Score").unwrap()[0], 337.0);
        assert_eq!(t.numeric("LOR").unwrap()[1], 4.5);
    }

    #[test]
    fn missing_column_is_named() {
        let f = write_temp_csv("GRE Score,TOEFL Score\n300,100\n");
        let err = load_csv(f.path(), Schema::Admissions).unwrap_err();
        assert!(err.to_string().contains("University Rating"), "{err}");
    }

    #[test]
    fn unparseable_cell_reports_row() {
        let bad = ADMISSIONS_CSV.replace("316", "three-sixteen");
        let f = write_temp_csv(&bad);
        let err = load_csv(f.path(), Schema::Admissions).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 3") && msg.contains("GRE Score"), "{msg}");
    }

    #[test]
    fn missing_cells_drop_rows() {
        let gappy = ADMISSIONS_CSV.replace("324", "");
        let f = write_temp_csv(&gappy);
        let t = load_csv(f.path(), Schema::Admissions).unwrap();
        assert_eq!(t.n_rows(), 4);
        assert_eq!(t.dropped_rows, 1);
    }

    #[test]
    fn empty_file_is_an_error() {
        let f = write_temp_csv("");
        assert!(load_csv(f.path(), Schema::Admissions).is_err());
    }

    #[test]
    fn loads_loans_schema() {
        let csv = "\
person_age,person_income,person_home_ownership,person_emp_length,loan_intent,loan_grade,loan_amnt,loan_int_rate,loan_percent_income,cb_person_default_on_file,cb_person_cred_hist_length,loan_status
22,59000,RENT,5,PERSONAL,D,35000,16.02,0.59,Y,3,0
25,9600,OWN,1,EDUCATION,B,1000,11.14,0.1,N,2,1
";
        let f = write_temp_csv(csv);
        let t = load_csv(f.path(), Schema::Loans).unwrap();
        assert_eq!(t.n_rows(), 2);
        assert_eq!(t.categorical("loan_intent").unwrap()[1], "EDUCATION");
        assert_eq!(t.binary_labels().unwrap(), vec![0, 1]);
    }

    #[test]
    fn normalize_examples() {
        let col = |name: &str, v: Vec<f64>| Column {
            name: name.to_string(),
            data: ColumnData::Numeric(v),
        };
        let t = RawTable::from_columns(
            Schema::Admissions,
            vec![
                col("GRE Score", vec![260.0, 340.0, 260.0]),
                col("TOEFL Score", vec![5.0, 5.0, 5.0]),
                col("University Rating", vec![1.0, 2.0, 3.0]),
                col("SOP", vec![1.0, 1.0, 1.0]),
                col("LOR", vec![1.0, 1.0, 1.0]),
                col("CGPA", vec![8.0, 9.0, 10.0]),
                col("Research", vec![0.0, 1.0, 0.0]),
                col("Chance of Admit", vec![0.4, 0.9, 0.6]),
            ],
        )
        .unwrap();
        let (n, stats) = normalize(&t).unwrap();
        assert_eq!(n.numeric("GRE Score").unwrap(), &[0.0, 1.0, 0.0]);
        assert_eq!(n.numeric("TOEFL Score").unwrap(), &[0.0, 0.0, 0.0]);
        assert_eq!(n.numeric("University Rating").unwrap(), &[0.0, 0.5, 1.0]);
        match &stats.columns[0].1 {
            ColumnStats::Numeric { min, max } => {
                assert_eq!((*min, *max), (260.0, 340.0));
            }
            _ => panic!("expected numeric stats"),
        }
    }

    #[test]
    fn normalize_encodes_categoricals_by_sorted_value() {
        let t = RawTable::from_columns(
            Schema::Loans,
            vec![
                Column { name: "person_age".into(), data: ColumnData::Numeric(vec![20.0, 30.0, 40.0]) },
                Column { name: "person_income".into(), data: ColumnData::Numeric(vec![1.0, 2.0, 3.0]) },
                Column { name: "person_home_ownership".into(), data: ColumnData::Categorical(vec!["RENT".into(), "OWN".into(), "RENT".into()]) },
                Column { name: "person_emp_length".into(), data: ColumnData::Numeric(vec![1.0, 2.0, 3.0]) },
                Column { name: "loan_intent".into(), data: ColumnData::Categorical(vec!["VENTURE".into(), "EDUCATION".into(), "MEDICAL".into()]) },
                Column { name: "loan_grade".into(), data: ColumnData::Categorical(vec!["A".into(), "B".into(), "C".into()]) },
                Column { name: "loan_amnt".into(), data: ColumnData::Numeric(vec![1.0, 2.0, 3.0]) },
                Column { name: "loan_int_rate".into(), data: ColumnData::Numeric(vec![1.0, 2.0, 3.0]) },
                Column { name: "loan_percent_income".into(), data: ColumnData::Numeric(vec![0.1, 0.2, 0.3]) },
                Column { name: "cb_person_default_on_file".into(), data: ColumnData::Categorical(vec!["Y".into(), "N".into(), "N".into()]) },
                Column { name: "cb_person_cred_hist_length".into(), data: ColumnData::Numeric(vec![2.0, 3.0, 4.0]) },
                Column { name: "loan_status".into(), data: ColumnData::Numeric(vec![0.0, 1.0, 1.0]) },
            ],
        )
        .unwrap();
        let (n, _) = normalize(&t).unwrap();
        // EDUCATION < MEDICAL < VENTURE alphabetically -> 0, 0.5, 1.
        assert_eq!(n.numeric("loan_intent").unwrap(), &[1.0, 0.0, 0.5]);
        // Two categories -> {0, 1}; N < Y.
        assert_eq!(n.numeric("cb_person_default_on_file").unwrap(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn admissions_labels_binarize_at_range_midpoint() {
        let f = write_temp_csv(ADMISSIONS_CSV);
        let t = load_csv(f.path(), Schema::Admissions).unwrap();
        // Range midpoint is (0.65 + 0.92) / 2 = 0.785.
        assert_eq!(t.binary_labels().unwrap(), vec![1, 0, 0, 1, 0]);
    }

    fn tiny_labelled_table(labels: &[u8]) -> RawTable {
        let n = labels.len();
        let filler = |v: f64| vec![v; n];
        RawTable::from_columns(
            Schema::Admissions,
            vec![
                Column { name: "GRE Score".into(), data: ColumnData::Numeric((0..n).map(|i| 300.0 + i as f64).collect()) },
                Column { name: "TOEFL Score".into(), data: ColumnData::Numeric(filler(100.0)) },
                Column { name: "University Rating".into(), data: ColumnData::Numeric(filler(3.0)) },
                Column { name: "SOP".into(), data: ColumnData::Numeric(filler(3.0)) },
                Column { name: "LOR".into(), data: ColumnData::Numeric(filler(3.0)) },
                Column { name: "CGPA".into(), data: ColumnData::Numeric(filler(8.0)) },
                Column { name: "Research".into(), data: ColumnData::Numeric(filler(0.0)) },
                Column {
                    name: "Chance of Admit".into(),
                    data: ColumnData::Numeric(labels.iter().map(|&l| if l == 1 { 0.9 } else { 0.1 }).collect()),
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn oversample_reaches_floor() {
        let labels: Vec<u8> = [vec![0u8; 18], vec![1u8; 2]].concat();
        let t = tiny_labelled_table(&labels);
        let (out, out_labels) = oversample_minority(&t, &labels, 0.4, 7).unwrap();
        let pos = out_labels.iter().filter(|&&l| l == 1).count();
        assert!(pos as f64 / out_labels.len() as f64 >= 0.4);
        assert_eq!(out.n_rows(), out_labels.len());
        // Original rows are a prefix: nothing removed.
        let prefix = out.select_rows(&(0..t.n_rows()).collect::<Vec<_>>()).unwrap();
        assert_eq!(prefix.numeric("GRE Score").unwrap(), t.numeric("GRE Score").unwrap());
    }

    #[test]
    fn oversample_balanced_table_unchanged() {
        let labels: Vec<u8> = [vec![0u8; 10], vec![1u8; 10]].concat();
        let t = tiny_labelled_table(&labels);
        let (out, out_labels) = oversample_minority(&t, &labels, 0.4, 7).unwrap();
        assert_eq!(out, t);
        assert_eq!(out_labels, labels);
    }

    #[test]
    fn oversample_single_class_errors() {
        let labels = vec![1u8; 6];
        let t = tiny_labelled_table(&labels);
        assert!(oversample_minority(&t, &labels, 0.4, 7).is_err());
    }

    #[test]
    fn oversample_is_deterministic() {
        let labels: Vec<u8> = [vec![0u8; 30], vec![1u8; 3]].concat();
        let t = tiny_labelled_table(&labels);
        let a = oversample_minority(&t, &labels, 0.45, 99).unwrap();
        let b = oversample_minority(&t, &labels, 0.45, 99).unwrap();
        assert_eq!(a, b);
    }
}
