//! Moral feature mappings: turn raw application/loan rows into context
//! vectors, judgment scores, thresholds, and moral labels.
//!
//! Admissions terms are computed on min-max-normalized values; the loans
//! mapping works on raw values because its severity and duration terms
//! are genuine ratios (loan-to-income, reciprocal tenure) that
//! normalization would distort.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{normalize, RawTable, Schema};
use crate::error::{Error, Result};
use crate::ethics::{
    context_threshold, ethical_judgment, moral_label, ContextVector, NormativeWeights, Sign,
    SignProfile,
};
use crate::risk::{lower_quantile, TailFraction};

/// Everything the annotation pipeline needs, with documented defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingConfig {
    pub weights: NormativeWeights,
    pub signs: SignProfile,
    /// Base half-width of the morally grey zone.
    pub tau_default: f64,
    /// Passing overall score for the admissions utility/violation branches.
    pub pass_mark: f64,
    /// Utility divisor applied below the pass mark (the harsher one).
    pub penalty_high: f64,
    /// Utility divisor applied above the pass mark.
    pub penalty_low: f64,
    /// Loan-intent category -> utility score in [0, 1].
    pub intent_scores: BTreeMap<String, f64>,
    /// Income quantile separating low from high earners.
    pub income_split: f64,
    /// Loan grade -> violation score in [0, 1].
    pub grade_scale: BTreeMap<String, f64>,
    pub seed: u64,
    /// Test share used by [`split`].
    pub split_fraction: f64,
}

impl Default for MappingConfig {
    fn default() -> Self {
        let intent_scores: BTreeMap<String, f64> = [
            ("MEDICAL", 1.0),
            ("EDUCATION", 0.9),
            ("DEBTCONSOLIDATION", 0.6),
            ("VENTURE", 0.4),
            ("HOMEIMPROVEMENT", 0.3),
            ("PERSONAL", 0.2),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        let grade_scale: BTreeMap<String, f64> = ["A", "B", "C", "D", "E", "F", "G"]
            .into_iter()
            .enumerate()
            .map(|(i, g)| (g.to_string(), i as f64 / 6.0))
            .collect();
        Self {
            weights: NormativeWeights::preset("uniform").expect("preset is valid"),
            signs: SignProfile::default(),
            tau_default: 0.05,
            pass_mark: 0.6,
            penalty_high: 2.0,
            penalty_low: 1.0,
            intent_scores,
            income_split: 0.5,
            grade_scale,
            seed: 42,
            split_fraction: 0.2,
        }
    }
}

impl MappingConfig {
    /// Defaults tuned per dataset: the admissions judgment scores spread
    /// over a narrower band than the loans scores, so its grey zone gets a
    /// wider base half-width.
    pub fn default_for(schema: Schema) -> Self {
        let mut cfg = Self::default();
        cfg.tau_default = match schema {
            Schema::Admissions => 0.1,
            Schema::Loans => 0.05,
        };
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        if !self.tau_default.is_finite() || self.tau_default < 0.0 {
            return Err(Error::validation(
                "tau_default",
                format!("must be finite and >= 0, got {}", self.tau_default),
            ));
        }
        if !self.pass_mark.is_finite() || !(self.pass_mark > 0.0 && self.pass_mark < 1.0) {
            return Err(Error::validation(
                "pass_mark",
                format!("must be in (0, 1), got {}", self.pass_mark),
            ));
        }
        if !self.penalty_low.is_finite() || self.penalty_low <= 0.0 {
            return Err(Error::validation(
                "penalty_low",
                format!("must be > 0, got {}", self.penalty_low),
            ));
        }
        if !self.penalty_high.is_finite() || self.penalty_high < self.penalty_low {
            return Err(Error::validation(
                "penalty_high",
                format!(
                    "must be >= penalty_low ({}), got {}",
                    self.penalty_low, self.penalty_high
                ),
            ));
        }
        if !(self.income_split > 0.0 && self.income_split < 1.0) {
            return Err(Error::validation(
                "income_split",
                format!("must be in (0, 1), got {}", self.income_split),
            ));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(Error::validation(
                "split_fraction",
                format!("must be in (0, 1), got {}", self.split_fraction),
            ));
        }
        for (map_name, map) in [
            ("intent_scores", &self.intent_scores),
            ("grade_scale", &self.grade_scale),
        ] {
            if map.is_empty() {
                return Err(Error::validation(map_name, "must not be empty"));
            }
            for (k, v) in map {
                if !v.is_finite() || !(0.0..=1.0).contains(v) {
                    return Err(Error::validation(
                        map_name,
                        format!("score for `{k}` must be in [0, 1], got {v}"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Key-value snapshot of every knob, one `key = value` per line,
    /// sorted by key. Written next to exported datasets so a run's
    /// defaults are always recoverable.
    pub fn snapshot(&self) -> String {
        let mut entries: Vec<(String, String)> = vec![
            ("weights.alpha".into(), format!("{}", self.weights.alpha())),
            ("weights.beta".into(), format!("{}", self.weights.beta())),
            ("weights.gamma".into(), format!("{}", self.weights.gamma())),
            ("tau_default".into(), format!("{}", self.tau_default)),
            ("pass_mark".into(), format!("{}", self.pass_mark)),
            ("penalty_high".into(), format!("{}", self.penalty_high)),
            ("penalty_low".into(), format!("{}", self.penalty_low)),
            ("income_split".into(), format!("{}", self.income_split)),
            ("seed".into(), format!("{}", self.seed)),
            ("split_fraction".into(), format!("{}", self.split_fraction)),
        ];
        let sign_value = |s: Sign| match s {
            Sign::Positive => "1",
            Sign::Negative => "-1",
        };
        for (name, s) in [
            ("severity", self.signs.severity),
            ("utility", self.signs.utility),
            ("duration", self.signs.duration),
            ("intention", self.signs.intention),
            ("upheld", self.signs.upheld),
            ("violated", self.signs.violated),
        ] {
            entries.push((format!("signs.{name}"), sign_value(s).to_string()));
        }
        for (k, v) in &self.intent_scores {
            entries.push((format!("intent_scores.{k}"), format!("{v}")));
        }
        for (k, v) in &self.grade_scale {
            entries.push((format!("grade_scale.{k}"), format!("{v}")));
        }
        entries.sort();
        let mut out = String::new();
        for (k, v) in entries {
            writeln!(out, "{k} = {v}").expect("writing to String cannot fail");
        }
        out
    }
}

/// One admissions row after min-max normalization (all fields in [0, 1]).
#[derive(Debug, Clone, Copy)]
pub struct AdmissionsRow {
    pub gre: f64,
    pub toefl: f64,
    pub rating: f64,
    pub sop: f64,
    pub lor: f64,
    pub cgpa: f64,
    pub research: f64,
    pub chance: f64,
}

/// Context terms for one applicant.
///
/// `M = mean(gre, cgpa, toefl)` is the overall academic score. Utility is
/// `M` shrunk by the harsher divisor below the pass mark; duration is
/// halved without research experience; a violation is recorded only for
/// the "qualified but rejected" combination (strong score, low admission
/// chance) — other combinations assert no violation.
pub fn map_admissions(row: &AdmissionsRow, cfg: &MappingConfig) -> Result<ContextVector> {
    let m = (row.gre + row.cgpa + row.toefl) / 3.0;
    let severity = (row.gre + row.cgpa) / 2.0;
    let utility = if m <= cfg.pass_mark {
        m / cfg.penalty_high
    } else {
        m / cfg.penalty_low
    };
    let research_factor = if row.research > 0.5 { 1.0 } else { 0.5 };
    let duration = (row.rating + row.cgpa) / 2.0 * research_factor;
    let intention = (row.sop + row.research) / 2.0;
    let upheld = (row.gre + row.cgpa + row.sop + row.lor) / 4.0;
    let violated = if m > cfg.pass_mark && row.chance < 0.5 {
        m
    } else {
        0.0
    };
    ContextVector::new(
        severity.clamp(0.0, 1.0),
        utility.clamp(0.0, 1.0),
        duration.clamp(0.0, 1.0),
        intention.clamp(0.0, 1.0),
        upheld.clamp(0.0, 1.0),
        violated.clamp(0.0, 1.0),
    )
}

/// One loan row, raw (un-normalized) values.
#[derive(Debug, Clone)]
pub struct LoansRow {
    pub income: f64,
    pub emp_length: f64,
    pub cred_hist: f64,
    pub loan_amount: f64,
    pub intent: String,
    pub grade: String,
    pub defaulted: bool,
}

/// Table-level statistics the loans mapping depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoansTableStats {
    pub max_loan_amount: f64,
    /// Incomes strictly above this are "high"; at or below, "low".
    pub income_threshold: f64,
}

impl LoansTableStats {
    pub fn from_table(table: &RawTable, cfg: &MappingConfig) -> Result<Self> {
        let amounts = table.numeric("loan_amnt")?;
        let incomes = table.numeric("person_income")?;
        let max_loan_amount = amounts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let income_threshold =
            lower_quantile(incomes, TailFraction::new(cfg.income_split)?)?;
        Ok(Self {
            max_loan_amount,
            income_threshold,
        })
    }
}

/// Context terms for one loan.
///
/// Severity is the loan-to-income ratio capped at 1 (a zero income
/// saturates it instead of failing, counted by `warnings`); utility is
/// the intent score scaled by relative loan size; duration decays with
/// both employment and credit-history tenure; principle terms key off the
/// default flag, with high earners' defaults judged half as harshly.
pub fn map_loans(
    row: &LoansRow,
    stats: &LoansTableStats,
    cfg: &MappingConfig,
    warnings: &mut usize,
) -> Result<ContextVector> {
    let severity = if row.income <= 0.0 {
        *warnings += 1;
        1.0
    } else {
        (row.loan_amount / row.income).min(1.0)
    };
    let intent_score = *cfg.intent_scores.get(&row.intent).ok_or_else(|| {
        Error::Data(format!(
            "loan_intent `{}` has no configured utility score",
            row.intent
        ))
    })?;
    let utility = if stats.max_loan_amount > 0.0 {
        intent_score * row.loan_amount / stats.max_loan_amount
    } else {
        0.0
    };
    let duration = (1.0 / (1.0 + row.emp_length.max(0.0))
        + 1.0 / (1.0 + row.cred_hist.max(0.0)))
    .min(1.0);
    let upheld: f64 = if !row.defaulted {
        1.0
    } else if row.income > stats.income_threshold {
        0.5
    } else {
        0.0
    };
    let grade_score = *cfg.grade_scale.get(&row.grade).ok_or_else(|| {
        Error::Data(format!(
            "loan_grade `{}` has no configured violation score",
            row.grade
        ))
    })?;
    let violated = f64::from(row.defaulted).max(grade_score);
    ContextVector::new(
        severity.clamp(0.0, 1.0),
        utility.clamp(0.0, 1.0),
        duration.clamp(0.0, 1.0),
        intent_score.clamp(0.0, 1.0),
        upheld.clamp(0.0, 1.0),
        violated.clamp(0.0, 1.0),
    )
}

/// A fully annotated dataset: normalized features plus per-row moral
/// quantities, with both target variants retained.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedDataset {
    pub schema: Schema,
    pub feature_names: Vec<String>,
    /// Row-major normalized feature matrix.
    pub features: Vec<Vec<f64>>,
    pub contexts: Vec<ContextVector>,
    pub ej: Vec<f64>,
    pub tau_plus: Vec<f64>,
    /// `max(tau_plus - ej, 0)`: how far the row falls short of moral approval.
    pub shortfall: Vec<f64>,
    pub original_label: Vec<u8>,
    pub moral_label: Vec<u8>,
    /// Zero-income rows whose severity saturated at 1.
    pub zero_income_warnings: usize,
}

impl AnnotatedDataset {
    pub fn n_rows(&self) -> usize {
        self.ej.len()
    }

    /// New dataset holding the selected rows (indices may repeat).
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.n_rows()) {
            return Err(Error::validation(
                "row index",
                format!("index {bad} out of range for {} rows", self.n_rows()),
            ));
        }
        let pick_f = |v: &[f64]| indices.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let pick_u = |v: &[u8]| indices.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Ok(Self {
            schema: self.schema,
            feature_names: self.feature_names.clone(),
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            contexts: indices.iter().map(|&i| self.contexts[i]).collect(),
            ej: pick_f(&self.ej),
            tau_plus: pick_f(&self.tau_plus),
            shortfall: pick_f(&self.shortfall),
            original_label: pick_u(&self.original_label),
            moral_label: pick_u(&self.moral_label),
            zero_income_warnings: self.zero_income_warnings,
        })
    }

    /// Share of rows where the moral label agrees with the original one.
    pub fn label_agreement(&self) -> f64 {
        if self.n_rows() == 0 {
            return 0.0;
        }
        let agree = self
            .original_label
            .iter()
            .zip(&self.moral_label)
            .filter(|(a, b)| a == b)
            .count();
        agree as f64 / self.n_rows() as f64
    }

    /// CSV with the normalized features and the original binary target.
    pub fn to_csv_original(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{},label", self.feature_names.join(","));
        for i in 0..self.n_rows() {
            for x in &self.features[i] {
                let _ = write!(out, "{x},");
            }
            let _ = writeln!(out, "{}", self.original_label[i]);
        }
        out
    }

    /// CSV with the normalized features and the appended moral columns
    /// (judgment score, threshold, shortfall, both labels). Intermediate
    /// context terms and weights are deliberately not exported.
    pub fn to_csv_moral(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{},ej,tau_plus,shortfall,label_original,label_moral",
            self.feature_names.join(",")
        );
        for i in 0..self.n_rows() {
            for x in &self.features[i] {
                let _ = write!(out, "{x},");
            }
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                self.ej[i],
                self.tau_plus[i],
                self.shortfall[i],
                self.original_label[i],
                self.moral_label[i]
            );
        }
        out
    }
}

/// Annotate every row of a raw table: normalize features, apply the
/// schema's moral mapping, and attach judgment scores, thresholds,
/// shortfalls, and both labels. Deterministic in `(table, cfg)`.
pub fn annotate(table: &RawTable, cfg: &MappingConfig) -> Result<AnnotatedDataset> {
    cfg.validate()?;
    let (normalized, _stats) = normalize(table)?;
    let schema = table.schema();
    let feature_names: Vec<String> = schema
        .feature_columns()
        .iter()
        .map(|s| s.to_string())
        .collect();
    let n = table.n_rows();

    let mut features = Vec::with_capacity(n);
    let feature_cols: Vec<&[f64]> = feature_names
        .iter()
        .map(|name| normalized.numeric(name))
        .collect::<Result<_>>()?;
    for i in 0..n {
        features.push(feature_cols.iter().map(|c| c[i]).collect::<Vec<f64>>());
    }

    let original_label = table.binary_labels()?;
    let mut zero_income_warnings = 0usize;
    let contexts: Vec<ContextVector> = match schema {
        Schema::Admissions => {
            let gre = normalized.numeric("GRE Score")?;
            let toefl = normalized.numeric("TOEFL Score")?;
            let rating = normalized.numeric("University Rating")?;
            let sop = normalized.numeric("SOP")?;
            let lor = normalized.numeric("LOR")?;
            let cgpa = normalized.numeric("CGPA")?;
            let research = normalized.numeric("Research")?;
            let chance = normalized.numeric("Chance of Admit")?;
            (0..n)
                .map(|i| {
                    map_admissions(
                        &AdmissionsRow {
                            gre: gre[i],
                            toefl: toefl[i],
                            rating: rating[i],
                            sop: sop[i],
                            lor: lor[i],
                            cgpa: cgpa[i],
                            research: research[i],
                            chance: chance[i],
                        },
                        cfg,
                    )
                })
                .collect::<Result<_>>()?
        }
        Schema::Loans => {
            let stats = LoansTableStats::from_table(table, cfg)?;
            let income = table.numeric("person_income")?;
            let emp = table.numeric("person_emp_length")?;
            let cred = table.numeric("cb_person_cred_hist_length")?;
            let amount = table.numeric("loan_amnt")?;
            let intent = table.categorical("loan_intent")?;
            let grade = table.categorical("loan_grade")?;
            let default_flag = table.categorical("cb_person_default_on_file")?;
            (0..n)
                .map(|i| {
                    map_loans(
                        &LoansRow {
                            income: income[i],
                            emp_length: emp[i],
                            cred_hist: cred[i],
                            loan_amount: amount[i],
                            intent: intent[i].clone(),
                            grade: grade[i].clone(),
                            defaulted: default_flag[i] == "Y",
                        },
                        &stats,
                        cfg,
                        &mut zero_income_warnings,
                    )
                })
                .collect::<Result<_>>()?
        }
    };

    let mut ej = Vec::with_capacity(n);
    let mut tau_plus = Vec::with_capacity(n);
    let mut shortfall = Vec::with_capacity(n);
    let mut moral = Vec::with_capacity(n);
    for ec in &contexts {
        let score = ethical_judgment(&cfg.weights, ec, &cfg.signs)?;
        let tp = context_threshold(&cfg.weights, ec, &cfg.signs, cfg.tau_default)?;
        ej.push(score);
        tau_plus.push(tp.tau_plus());
        shortfall.push((tp.tau_plus() - score).max(0.0));
        moral.push(moral_label(score, &tp));
    }

    Ok(AnnotatedDataset {
        schema,
        feature_names,
        features,
        contexts,
        ej,
        tau_plus,
        shortfall,
        original_label,
        moral_label: moral,
        zero_income_warnings,
    })
}

/// Stratified train/test split on the original label.
///
/// Each class contributes `round(fraction * class size)` rows to the test
/// side; row order within each side follows the source table. Identical
/// `(fraction, seed)` always produce identical splits.
pub fn split(
    data: &AnnotatedDataset,
    fraction: f64,
    seed: u64,
) -> Result<(AnnotatedDataset, AnnotatedDataset)> {
    if !fraction.is_finite() || !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::validation(
            "split fraction",
            format!("must be in (0, 1), got {fraction}"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test_idx = Vec::new();
    let mut train_idx = Vec::new();
    for class in [0u8, 1u8] {
        let mut members: Vec<usize> = (0..data.n_rows())
            .filter(|&i| data.original_label[i] == class)
            .collect();
        members.shuffle(&mut rng);
        let n_test = ((members.len() as f64) * fraction).round() as usize;
        let n_test = n_test.min(members.len());
        test_idx.extend_from_slice(&members[..n_test]);
        train_idx.extend_from_slice(&members[n_test..]);
    }
    test_idx.sort_unstable();
    train_idx.sort_unstable();
    Ok((data.subset(&train_idx)?, data.subset(&test_idx)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Column, ColumnData};
    use crate::ethics::{moral_label as eth_moral_label, ThresholdPair};

    fn row(gre: f64, toefl: f64, cgpa: f64) -> AdmissionsRow {
        AdmissionsRow {
            gre,
            toefl,
            rating: 0.5,
            sop: 0.5,
            lor: 0.5,
            cgpa,
            research: 1.0,
            chance: 0.8,
        }
    }

    #[test]
    fn admissions_severity_is_gre_cgpa_mean() {
        let cfg = MappingConfig::default();
        let ec = map_admissions(&row(1.0, 0.3, 1.0), &cfg).unwrap();
        assert_eq!(ec.severity, 1.0);
        let ec = map_admissions(&row(0.2, 0.3, 0.8), &cfg).unwrap();
        assert!((ec.severity - 0.5).abs() < 1e-12);
    }

    #[test]
    fn admissions_all_zero_row_maps_to_zero_context() {
        let cfg = MappingConfig::default();
        let zero = AdmissionsRow {
            gre: 0.0,
            toefl: 0.0,
            rating: 0.0,
            sop: 0.0,
            lor: 0.0,
            cgpa: 0.0,
            research: 0.0,
            chance: 0.0,
        };
        let ec = map_admissions(&zero, &cfg).unwrap();
        assert_eq!(ec.terms(), [0.0; 6]);
    }

    #[test]
    fn admissions_violated_fires_only_for_qualified_rejection() {
        let cfg = MappingConfig::default();
        // M = 0.9 > pass 0.6 and chance 0.3 < 0.5 -> violated = M.
        let mut r = row(0.9, 0.9, 0.9);
        r.chance = 0.3;
        let ec = map_admissions(&r, &cfg).unwrap();
        assert!((ec.violated - 0.9).abs() < 1e-12);
        // Same score, admitted -> no violation.
        r.chance = 0.7;
        let ec = map_admissions(&r, &cfg).unwrap();
        assert_eq!(ec.violated, 0.0);
        // Weak score, rejected -> unlisted branch, no violation asserted.
        let mut weak = row(0.2, 0.2, 0.2);
        weak.chance = 0.3;
        let ec = map_admissions(&weak, &cfg).unwrap();
        assert_eq!(ec.violated, 0.0);
    }

    #[test]
    fn admissions_utility_jumps_upward_at_pass_mark() {
        let mut cfg = MappingConfig::default();
        let eps = 1e-9;
        let below = map_admissions(&row(0.6 - eps, 0.6 - eps, 0.6 - eps), &cfg).unwrap();
        let above = map_admissions(&row(0.6 + eps, 0.6 + eps, 0.6 + eps), &cfg).unwrap();
        // penalty_high 2, penalty_low 1: utility doubles across the mark.
        assert!(above.utility > below.utility + 0.25);

        // Equal divisors: continuous at the mark.
        cfg.penalty_low = 2.0;
        let below = map_admissions(&row(0.6 - eps, 0.6 - eps, 0.6 - eps), &cfg).unwrap();
        let above = map_admissions(&row(0.6 + eps, 0.6 + eps, 0.6 + eps), &cfg).unwrap();
        assert!((above.utility - below.utility).abs() < 1e-6);
    }

    #[test]
    fn admissions_duration_halved_without_research() {
        let cfg = MappingConfig::default();
        let mut r = row(0.5, 0.5, 0.7);
        r.rating = 0.9;
        let with = map_admissions(&r, &cfg).unwrap();
        r.research = 0.0;
        let without = map_admissions(&r, &cfg).unwrap();
        assert!((with.duration - 0.8).abs() < 1e-12);
        assert!((without.duration - 0.4).abs() < 1e-12);
    }

    fn loans_row() -> LoansRow {
        LoansRow {
            income: 50_000.0,
            emp_length: 4.0,
            cred_hist: 10.0,
            loan_amount: 10_000.0,
            intent: "EDUCATION".to_string(),
            grade: "B".to_string(),
            defaulted: false,
        }
    }

    fn loans_stats() -> LoansTableStats {
        LoansTableStats {
            max_loan_amount: 35_000.0,
            income_threshold: 55_000.0,
        }
    }

    #[test]
    fn loans_severity_is_clamped_ratio() {
        let cfg = MappingConfig::default();
        let mut w = 0;
        let mut r = loans_row();
        r.loan_amount = r.income;
        let ec = map_loans(&r, &loans_stats(), &cfg, &mut w).unwrap();
        assert_eq!(ec.severity, 1.0);
        r.loan_amount = 2.0 * r.income;
        let ec = map_loans(&r, &loans_stats(), &cfg, &mut w).unwrap();
        assert_eq!(ec.severity, 1.0);
        r.loan_amount = r.income / 4.0;
        let ec = map_loans(&r, &loans_stats(), &cfg, &mut w).unwrap();
        assert!((ec.severity - 0.25).abs() < 1e-12);
        assert_eq!(w, 0);
    }

    #[test]
    fn loans_severity_ratio_is_scale_invariant() {
        let cfg = MappingConfig::default();
        let mut w = 0;
        let mut r = loans_row();
        let base = map_loans(&r, &loans_stats(), &cfg, &mut w).unwrap();
        r.income *= 3.5;
        r.loan_amount *= 3.5;
        let scaled = map_loans(&r, &loans_stats(), &cfg, &mut w).unwrap();
        assert!((base.severity - scaled.severity).abs() < 1e-12);
    }

    #[test]
    fn loans_zero_income_saturates_with_warning() {
        let cfg = MappingConfig::default();
        let mut w = 0;
        let mut r = loans_row();
        r.income = 0.0;
        let ec = map_loans(&r, &loans_stats(), &cfg, &mut w).unwrap();
        assert_eq!(ec.severity, 1.0);
        assert_eq!(w, 1);
    }

    #[test]
    fn loans_duration_saturates_for_fresh_borrowers() {
        let cfg = MappingConfig::default();
        let mut w = 0;
        let mut r = loans_row();
        r.emp_length = 0.0;
        r.cred_hist = 0.0;
        let ec = map_loans(&r, &loans_stats(), &cfg, &mut w).unwrap();
        assert_eq!(ec.duration, 1.0);
        // Long tenures decay the term.
        r.emp_length = 9.0;
        r.cred_hist = 19.0;
        let ec = map_loans(&r, &loans_stats(), &cfg, &mut w).unwrap();
        assert!((ec.duration - 0.15).abs() < 1e-12);
    }

    #[test]
    fn loans_upheld_branches() {
        let cfg = MappingConfig::default();
        let mut w = 0;
        let stats = loans_stats();
        let mut r = loans_row();
        let ec = map_loans(&r, &stats, &cfg, &mut w).unwrap();
        assert_eq!(ec.upheld, 1.0);
        r.defaulted = true;
        // income 50k <= threshold 55k -> low-income defaulter.
        let ec = map_loans(&r, &stats, &cfg, &mut w).unwrap();
        assert_eq!(ec.upheld, 0.0);
        r.income = 100_000.0;
        let ec = map_loans(&r, &stats, &cfg, &mut w).unwrap();
        assert_eq!(ec.upheld, 0.5);
    }

    #[test]
    fn loans_violated_is_max_of_flag_and_grade() {
        let cfg = MappingConfig::default();
        let mut w = 0;
        let mut r = loans_row();
        r.grade = "G".to_string();
        let ec = map_loans(&r, &loans_stats(), &cfg, &mut w).unwrap();
        assert_eq!(ec.violated, 1.0);
        r.grade = "A".to_string();
        r.defaulted = true;
        let ec = map_loans(&r, &loans_stats(), &cfg, &mut w).unwrap();
        assert_eq!(ec.violated, 1.0);
        r.defaulted = false;
        let ec = map_loans(&r, &loans_stats(), &cfg, &mut w).unwrap();
        assert_eq!(ec.violated, 0.0);
    }

    #[test]
    fn loans_unknown_categories_are_errors() {
        let cfg = MappingConfig::default();
        let mut w = 0;
        let mut r = loans_row();
        r.intent = "YACHT".to_string();
        assert!(map_loans(&r, &loans_stats(), &cfg, &mut w).is_err());
        r = loans_row();
        r.grade = "Z".to_string();
        assert!(map_loans(&r, &loans_stats(), &cfg, &mut w).is_err());
    }

    fn admissions_table(n: usize) -> RawTable {
        // Deterministic spread of plausible values.
        let f = |i: usize, lo: f64, hi: f64| lo + (hi - lo) * (i as f64 / (n - 1) as f64);
        RawTable::from_columns(
            Schema::Admissions,
            vec![
                Column { name: "GRE Score".into(), data: ColumnData::Numeric((0..n).map(|i| f(i, 290.0, 340.0).round()).collect()) },
                Column { name: "TOEFL Score".into(), data: ColumnData::Numeric((0..n).map(|i| f(i, 92.0, 120.0).round()).collect()) },
                Column { name: "University Rating".into(), data: ColumnData::Numeric((0..n).map(|i| (i % 5 + 1) as f64).collect()) },
                Column { name: "SOP".into(), data: ColumnData::Numeric((0..n).map(|i| (i % 9 + 1) as f64 / 2.0).collect()) },
                Column { name: "LOR".into(), data: ColumnData::Numeric((0..n).map(|i| ((i + 3) % 9 + 1) as f64 / 2.0).collect()) },
                Column { name: "CGPA".into(), data: ColumnData::Numeric((0..n).map(|i| f(i, 6.8, 9.9)).collect()) },
                Column { name: "Research".into(), data: ColumnData::Numeric((0..n).map(|i| (i % 2) as f64).collect()) },
                Column { name: "Chance of Admit".into(), data: ColumnData::Numeric((0..n).map(|i| f(i, 0.34, 0.97)).collect()) },
            ],
        )
        .unwrap()
    }

    #[test]
    fn annotate_preserves_rows_and_is_consistent() {
        let table = admissions_table(40);
        let cfg = MappingConfig::default();
        let data = annotate(&table, &cfg).unwrap();
        assert_eq!(data.n_rows(), 40);
        for i in 0..data.n_rows() {
            assert!(data.ej[i].is_finite());
            assert!(data.tau_plus[i].is_finite());
            assert!(data.shortfall[i] >= 0.0);
            for t in data.contexts[i].terms() {
                assert!((0.0..=1.0).contains(&t));
            }
            // Moral label agrees with the calculus applied directly.
            let tp = ThresholdPair::new(data.tau_plus[i], 0.0).unwrap();
            assert_eq!(data.moral_label[i], eth_moral_label(data.ej[i], &tp));
        }
    }

    #[test]
    fn annotate_is_deterministic() {
        let table = admissions_table(25);
        let cfg = MappingConfig::default();
        let a = annotate(&table, &cfg).unwrap();
        let b = annotate(&table, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv_moral(), b.to_csv_moral());
        assert_eq!(a.to_csv_original(), b.to_csv_original());
    }

    #[test]
    fn csv_exports_have_expected_headers() {
        let data = annotate(&admissions_table(5), &MappingConfig::default()).unwrap();
        let original = data.to_csv_original();
        let moral = data.to_csv_moral();
        assert!(original.starts_with("GRE Score,"));
        assert!(original.lines().next().unwrap().ends_with(",label"));
        assert!(moral
            .lines()
            .next()
            .unwrap()
            .ends_with("ej,tau_plus,shortfall,label_original,label_moral"));
        assert_eq!(original.lines().count(), 6);
        assert_eq!(moral.lines().count(), 6);
    }

    #[test]
    fn split_is_stratified_and_deterministic() {
        let mut data = annotate(&admissions_table(100), &MappingConfig::default()).unwrap();
        // Force a known 60/40 label mix.
        data.original_label = (0..100).map(|i| u8::from(i % 5 < 2)).collect();
        let (train, test) = split(&data, 0.2, 11).unwrap();
        assert_eq!(train.n_rows(), 80);
        assert_eq!(test.n_rows(), 20);
        let pos = |d: &AnnotatedDataset| d.original_label.iter().filter(|&&l| l == 1).count();
        assert_eq!(pos(&test), 8);
        assert_eq!(pos(&train), 32);
        let (train2, test2) = split(&data, 0.2, 11).unwrap();
        assert_eq!(train, train2);
        assert_eq!(test, test2);
        // Different seed shuffles differently but keeps the counts.
        let (_, test3) = split(&data, 0.2, 12).unwrap();
        assert_eq!(test3.n_rows(), 20);
        assert_ne!(test.features, test3.features);
    }

    #[test]
    fn split_rejects_degenerate_fractions() {
        let data = annotate(&admissions_table(10), &MappingConfig::default()).unwrap();
        assert!(split(&data, 0.0, 1).is_err());
        assert!(split(&data, 1.0, 1).is_err());
        assert!(split(&data, f64::NAN, 1).is_err());
    }

    #[test]
    fn snapshot_lists_every_knob_sorted() {
        let cfg = MappingConfig::default();
        let snap = cfg.snapshot();
        let lines: Vec<&str> = snap.lines().collect();
        let mut sorted = lines.clone();
        sorted.sort_unstable();
        assert_eq!(lines, sorted);
        assert!(snap.contains("pass_mark = 0.6"));
        assert!(snap.contains("intent_scores.MEDICAL = 1"));
        assert!(snap.contains("grade_scale.G = 1"));
        assert!(snap.contains("signs.severity = -1"));
        assert!(snap.contains("weights.alpha = 0.3333333333333333"));
    }

    #[test]
    fn config_validation_names_the_offender() {
        let mut cfg = MappingConfig::default();
        cfg.penalty_high = 0.5; // below penalty_low = 1
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("penalty_high"), "{err}");

        let mut cfg = MappingConfig::default();
        cfg.intent_scores.insert("MEDICAL".into(), 1.5);
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("MEDICAL"), "{err}");
    }
}
