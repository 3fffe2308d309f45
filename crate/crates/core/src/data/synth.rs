//! Deterministic synthetic dataset generators.
//!
//! Both generators emit tables shaped exactly like the source schemas,
//! with internally consistent correlations (strong applicants have high
//! admission chances; risky borrowers carry worse grades and higher
//! rates) so that the targets are genuinely learnable and the moral
//! mappings produce a healthy mix of labels. Identical seeds produce
//! byte-identical tables.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{Column, ColumnData, RawTable, Schema};
use crate::error::Result;

/// Row count of the admissions table used by the benchmark runs.
pub const ADMISSIONS_ROWS: usize = 770;
/// Row count of the loans table used by the benchmark runs.
pub const LOANS_ROWS: usize = 32_582;

/// Standard normal draw via Box–Muller.
///
/// Hand-rolled so generated tables stay byte-identical regardless of
/// distribution-crate implementation changes.
fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Round to the nearest 0.5 (the granularity of SOP/LOR ratings).
fn round_half(x: f64) -> f64 {
    (x * 2.0).round() / 2.0
}

/// Draw a sign pair from the four-quadrant mix `(p_pp, p_pm, p_mp)`,
/// remainder to `(-1, -1)`.
fn quadrant(rng: &mut ChaCha8Rng, p_pp: f64, p_pm: f64, p_mp: f64) -> (f64, f64) {
    let u: f64 = rng.gen_range(0.0..1.0);
    if u < p_pp {
        (1.0, 1.0)
    } else if u < p_pp + p_pm {
        (1.0, -1.0)
    } else if u < p_pp + p_pm + p_mp {
        (-1.0, 1.0)
    } else {
        (-1.0, -1.0)
    }
}

/// Synthetic graduate-admissions table.
///
/// Two weakly coupled latent factors drive the columns: academic
/// strength (GRE, TOEFL, CGPA — and through them the admission chance)
/// and engagement (SOP, LOR, rating, research). Each factor is sharply
/// bimodal, so the pool splits into four cohorts; the off-diagonal ones
/// (academically strong but disengaged, and vice versa) are where moral
/// judgments and admission outcomes genuinely part ways.
pub fn gen_admissions(n: usize, seed: u64) -> Result<RawTable> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gre = Vec::with_capacity(n);
    let mut toefl = Vec::with_capacity(n);
    let mut rating = Vec::with_capacity(n);
    let mut sop = Vec::with_capacity(n);
    let mut lor = Vec::with_capacity(n);
    let mut cgpa = Vec::with_capacity(n);
    let mut research = Vec::with_capacity(n);
    let mut chance = Vec::with_capacity(n);
    for _ in 0..n {
        let (sa, se) = quadrant(&mut rng, 0.40, 0.14, 0.14);
        let a = sa + 0.30 * normal(&mut rng);
        let e = se + 0.22 * normal(&mut rng);
        gre.push((315.0 + 14.0 * a + 1.8 * normal(&mut rng)).clamp(290.0, 340.0).round());
        toefl.push((106.0 + 7.5 * a + 1.5 * normal(&mut rng)).clamp(92.0, 120.0).round());
        rating.push((3.1 + 1.25 * e + 0.3 * normal(&mut rng)).round().clamp(1.0, 5.0));
        sop.push(round_half(3.25 + 1.2 * e + 0.28 * normal(&mut rng)).clamp(1.0, 5.0));
        lor.push(round_half(3.3 + 1.15 * e + 0.28 * normal(&mut rng)).clamp(1.0, 5.0));
        cgpa.push(round2((8.5 + 0.68 * a + 0.1 * normal(&mut rng)).clamp(6.8, 9.92)));
        let has_research = f64::from(e + 0.3 * normal(&mut rng) > 0.0);
        research.push(has_research);
        chance.push(round2(
            (0.70 + 0.155 * a + 0.015 * e + 0.035 * normal(&mut rng)).clamp(0.34, 0.97),
        ));
    }
    RawTable::from_columns(
        Schema::Admissions,
        vec![
            Column { name: "GRE Score".into(), data: ColumnData::Numeric(gre) },
            Column { name: "TOEFL Score".into(), data: ColumnData::Numeric(toefl) },
            Column { name: "University Rating".into(), data: ColumnData::Numeric(rating) },
            Column { name: "SOP".into(), data: ColumnData::Numeric(sop) },
            Column { name: "LOR".into(), data: ColumnData::Numeric(lor) },
            Column { name: "CGPA".into(), data: ColumnData::Numeric(cgpa) },
            Column { name: "Research".into(), data: ColumnData::Numeric(research) },
            Column { name: "Chance of Admit".into(), data: ColumnData::Numeric(chance) },
        ],
    )
}

const GRADES: [&str; 7] = ["A", "B", "C", "D", "E", "F", "G"];

/// Synthetic loan-application table.
///
/// Two latent factors drive the columns: financial strength (income,
/// grade, rate, default flag — and through them the approval) and the
/// purpose profile (loan intent, tenure). Intent never enters the
/// approval rule, so financially sound loans taken for poorly regarded
/// purposes are approved yet judged poorly — the off-diagonal cohorts
/// supply genuine moral/original disagreement.
pub fn gen_loans(n: usize, seed: u64) -> Result<RawTable> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut age = Vec::with_capacity(n);
    let mut income = Vec::with_capacity(n);
    let mut home = Vec::with_capacity(n);
    let mut emp_length = Vec::with_capacity(n);
    let mut intent = Vec::with_capacity(n);
    let mut grade = Vec::with_capacity(n);
    let mut amount = Vec::with_capacity(n);
    let mut int_rate = Vec::with_capacity(n);
    let mut percent_income = Vec::with_capacity(n);
    let mut default_flag = Vec::with_capacity(n);
    let mut cred_hist = Vec::with_capacity(n);
    let mut status = Vec::with_capacity(n);
    // Intents grouped by configured utility: well regarded vs poorly
    // regarded, with the mid-scored ones appearing at a lower rate.
    const GOOD_INTENTS: [&str; 2] = ["MEDICAL", "EDUCATION"];
    const BAD_INTENTS: [&str; 2] = ["PERSONAL", "HOMEIMPROVEMENT"];
    const MID_INTENTS: [&str; 2] = ["DEBTCONSOLIDATION", "VENTURE"];
    for _ in 0..n {
        let (sf, sm) = quadrant(&mut rng, 0.38, 0.16, 0.16);
        let f = sf + 0.25 * normal(&mut rng);
        let m = sm + 0.25 * normal(&mut rng);
        let row_age = (23.0 + 8.0 * rng.gen_range(0.0..1.0f64).powi(2) * 4.0
            + 2.0 * normal(&mut rng).abs())
        .clamp(21.0, 70.0)
        .round();
        let row_income = ((32_000.0 * (0.5 * f + 0.3 * normal(&mut rng)).exp()).round())
            .clamp(4_000.0, 300_000.0);
        let row_home = if f + 0.8 * normal(&mut rng) > 0.6 {
            if rng.gen_bool(0.4) { "OWN" } else { "MORTGAGE" }
        } else if rng.gen_bool(0.03) {
            "OTHER"
        } else {
            "RENT"
        };
        let row_emp = (4.0 + 1.2 * f + 2.8 * m + 2.0 * normal(&mut rng))
            .clamp(0.0, 35.0)
            .round();
        let row_intent = if rng.gen_bool(0.90) {
            if m > 0.0 {
                GOOD_INTENTS[rng.gen_range(0..2)]
            } else {
                BAD_INTENTS[rng.gen_range(0..2)]
            }
        } else {
            MID_INTENTS[rng.gen_range(0..2)]
        };
        let grade_idx = ((2.3 - 1.5 * f - 0.8 * m + 0.5 * normal(&mut rng)).round() as i64)
            .clamp(0, 6) as usize;
        let row_grade = GRADES[grade_idx];
        let pct_target = 0.24 - 0.14 * m - 0.03 * f + 0.10 * rng.gen_range(0.0..1.0f64);
        let row_amount = ((row_income * pct_target + 700.0 * normal(&mut rng))
            .clamp(500.0, 35_000.0)
            / 25.0)
            .round()
            * 25.0;
        let row_rate = round2((6.4 + 1.9 * grade_idx as f64 + 0.7 * normal(&mut rng))
            .clamp(5.4, 23.2));
        let row_pct = round2((row_amount / row_income).min(0.83));
        let row_default = f + 0.6 * normal(&mut rng) < -1.5;
        let row_cred = (2.0 + (row_age - 21.0) * 0.35 + 2.0 * normal(&mut rng))
            .clamp(2.0, 30.0)
            .round();
        // Approval: affordability, grade, and history only — intent is
        // deliberately absent, with a small noise floor so the boundary
        // is crisp but not degenerate.
        let score = 1.7 * f - 4.5 * (row_pct - 0.30) - 0.3 * (grade_idx as f64 - 2.0)
            - 1.4 * f64::from(row_default)
            + 0.4 * normal(&mut rng);
        let row_status = f64::from(score > 0.0);

        age.push(row_age);
        income.push(row_income);
        home.push(row_home.to_string());
        emp_length.push(row_emp);
        intent.push(row_intent.to_string());
        grade.push(row_grade.to_string());
        amount.push(row_amount);
        int_rate.push(row_rate);
        percent_income.push(row_pct);
        default_flag.push(if row_default { "Y".to_string() } else { "N".to_string() });
        cred_hist.push(row_cred);
        status.push(row_status);
    }
    RawTable::from_columns(
        Schema::Loans,
        vec![
            Column { name: "person_age".into(), data: ColumnData::Numeric(age) },
            Column { name: "person_income".into(), data: ColumnData::Numeric(income) },
            Column { name: "person_home_ownership".into(), data: ColumnData::Categorical(home) },
            Column { name: "person_emp_length".into(), data: ColumnData::Numeric(emp_length) },
            Column { name: "loan_intent".into(), data: ColumnData::Categorical(intent) },
            Column { name: "loan_grade".into(), data: ColumnData::Categorical(grade) },
            Column { name: "loan_amnt".into(), data: ColumnData::Numeric(amount) },
            Column { name: "loan_int_rate".into(), data: ColumnData::Numeric(int_rate) },
            Column { name: "loan_percent_income".into(), data: ColumnData::Numeric(percent_income) },
            Column { name: "cb_person_default_on_file".into(), data: ColumnData::Categorical(default_flag) },
            Column { name: "cb_person_cred_hist_length".into(), data: ColumnData::Numeric(cred_hist) },
            Column { name: "loan_status".into(), data: ColumnData::Numeric(status) },
        ],
    )
}

/// Generate the schema's standard benchmark table.
pub fn gen_standard(schema: Schema, seed: u64) -> Result<RawTable> {
    match schema {
        Schema::Admissions => gen_admissions(ADMISSIONS_ROWS, seed),
        Schema::Loans => gen_loans(LOANS_ROWS, seed),
    }
}
