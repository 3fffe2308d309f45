//! Classification metrics from the hard-label confusion matrix plus a
//! midrank ROC-AUC, with the positive class fixed to 1.
//!
//! Undefined metrics are reported as absent, never as 0: precision
//! vanishes without positive predictions, recall and ROC-AUC without
//! positive truth, ROC-AUC also without negative truth, and F1 whenever
//! either constituent is absent or both are zero.

use crate::error::{Error, Result};

/// One evaluation's worth of metrics; absent means undefined.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Metrics {
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub roc_auc: Option<f64>,
    pub moral_agreement: Option<f64>,
}

impl Metrics {
    pub const FIELD_NAMES: [&'static str; 6] = [
        "accuracy",
        "precision",
        "recall",
        "f1",
        "roc_auc",
        "moral_agreement",
    ];

    pub fn fields(&self) -> [Option<f64>; 6] {
        [
            self.accuracy,
            self.precision,
            self.recall,
            self.f1,
            self.roc_auc,
            self.moral_agreement,
        ]
    }
}

/// Scores probabilities against the original labels and the moral ones.
///
/// Hard labels are `1[p >= 0.5]`. Accuracy, precision, recall, and F1
/// come from the confusion matrix; ROC-AUC is the midrank statistic
/// (equivalent to pair counting with ties worth one half);
/// moral_agreement is the fraction of hard labels equal to the row's
/// moral label.
pub fn compute_metrics(y_true: &[u8], probs: &[f64], moral_labels: &[u8]) -> Result<Metrics> {
    if y_true.is_empty() {
        return Err(Error::validation("y_true", "must be nonempty"));
    }
    if probs.len() != y_true.len() {
        return Err(Error::LengthMismatch {
            left: probs.len(),
            right: y_true.len(),
        });
    }
    if moral_labels.len() != y_true.len() {
        return Err(Error::LengthMismatch {
            left: moral_labels.len(),
            right: y_true.len(),
        });
    }
    if let Some(&bad) = y_true.iter().chain(moral_labels).find(|&&v| v > 1) {
        return Err(Error::validation(
            "labels",
            format!("must be 0 or 1, got {bad}"),
        ));
    }
    if let Some(&bad) = probs
        .iter()
        .find(|p| !p.is_finite() || !(0.0..=1.0).contains(*p))
    {
        return Err(Error::validation(
            "probabilities",
            format!("must lie in [0, 1], got {bad}"),
        ));
    }

    let n = y_true.len();
    let hard: Vec<u8> = probs.iter().map(|&p| u8::from(p >= 0.5)).collect();

    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut tn = 0usize;
    let mut fnn = 0usize;
    for (&y, &h) in y_true.iter().zip(&hard) {
        match (y, h) {
            (1, 1) => tp += 1,
            (0, 1) => fp += 1,
            (0, 0) => tn += 1,
            (1, 0) => fnn += 1,
            _ => unreachable!("labels validated to be binary"),
        }
    }

    let accuracy = Some((tp + tn) as f64 / n as f64);
    let precision = if tp + fp > 0 {
        Some(tp as f64 / (tp + fp) as f64)
    } else {
        None
    };
    let recall = if tp + fnn > 0 {
        Some(tp as f64 / (tp + fnn) as f64)
    } else {
        None
    };
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    let roc_auc = midrank_auc(y_true, probs);
    let agree = hard
        .iter()
        .zip(moral_labels)
        .filter(|(h, m)| h == m)
        .count();
    let moral_agreement = Some(agree as f64 / n as f64);

    Ok(Metrics {
        accuracy,
        precision,
        recall,
        f1,
        roc_auc,
        moral_agreement,
    })
}

/// Midrank ROC-AUC; absent unless both classes appear.
fn midrank_auc(y_true: &[u8], scores: &[f64]) -> Option<f64> {
    let n = y_true.len();
    let n_pos = y_true.iter().filter(|&&y| y == 1).count();
    let n_neg = n - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut ranks = vec![0.0f64; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Tied scores share the mean of their 1-based rank range.
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = mid;
        }
        i = j + 1;
    }
    let rank_sum_pos: f64 = y_true
        .iter()
        .zip(&ranks)
        .filter(|(&y, _)| y == 1)
        .map(|(_, &r)| r)
        .sum();
    let n_pos_f = n_pos as f64;
    Some((rank_sum_pos - n_pos_f * (n_pos_f + 1.0) / 2.0) / (n_pos_f * n_neg as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// O(n^2) pair-count oracle: ordered pairs score 1, ties one half.
    fn pair_count_auc(y: &[u8], s: &[f64]) -> Option<f64> {
        let pos: Vec<f64> = y
            .iter()
            .zip(s)
            .filter(|(&y, _)| y == 1)
            .map(|(_, &v)| v)
            .collect();
        let neg: Vec<f64> = y
            .iter()
            .zip(s)
            .filter(|(&y, _)| y == 0)
            .map(|(_, &v)| v)
            .collect();
        if pos.is_empty() || neg.is_empty() {
            return None;
        }
        let mut total = 0.0;
        for &p in &pos {
            for &q in &neg {
                total += if p > q {
                    1.0
                } else if p == q {
                    0.5
                } else {
                    0.0
                };
            }
        }
        Some(total / (pos.len() * neg.len()) as f64)
    }

    /// Brute-force confusion-matrix oracle.
    fn oracle(y: &[u8], hard: &[u8]) -> (Option<f64>, Option<f64>, Option<f64>, Option<f64>) {
        let n = y.len() as f64;
        let count = |a: u8, b: u8| {
            y.iter()
                .zip(hard)
                .filter(|(&t, &h)| t == a && h == b)
                .count() as f64
        };
        let (tp, fp, tn, fnn) = (count(1, 1), count(0, 1), count(0, 0), count(1, 0));
        let acc = Some((tp + tn) / n);
        let prec = if tp + fp > 0.0 { Some(tp / (tp + fp)) } else { None };
        let rec = if tp + fnn > 0.0 { Some(tp / (tp + fnn)) } else { None };
        let f1 = match (prec, rec) {
            (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
            _ => None,
        };
        (acc, prec, rec, f1)
    }

    #[test]
    fn perfect_predictions_score_one_everywhere() {
        let y = [1u8, 0, 1, 0, 1];
        let p = [0.9, 0.1, 0.8, 0.2, 0.7];
        let m = compute_metrics(&y, &p, &y).unwrap();
        assert_eq!(m.accuracy, Some(1.0));
        assert_eq!(m.precision, Some(1.0));
        assert_eq!(m.recall, Some(1.0));
        assert_eq!(m.f1, Some(1.0));
        assert_eq!(m.roc_auc, Some(1.0));
        assert_eq!(m.moral_agreement, Some(1.0));
    }

    #[test]
    fn constant_scores_give_auc_half() {
        let y = [1u8, 0, 1, 0];
        let p = [0.5, 0.5, 0.5, 0.5];
        let m = compute_metrics(&y, &p, &y).unwrap();
        assert_eq!(m.roc_auc, Some(0.5));
    }

    #[test]
    fn hand_example_auc_three_quarters() {
        // Pairs ordered correctly: (0.9, 0.6), (0.9, 0.1), (0.4, 0.1);
        // inverted: (0.4, 0.6). 3 of 4.
        let y = [1u8, 1, 0, 0];
        let p = [0.9, 0.4, 0.6, 0.1];
        let m = compute_metrics(&y, &p, &y).unwrap();
        assert!((m.roc_auc.unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn no_positive_predictions_leaves_precision_absent() {
        let y = [1u8, 0, 1, 0];
        let p = [0.1, 0.2, 0.3, 0.4];
        let m = compute_metrics(&y, &p, &y).unwrap();
        assert_eq!(m.precision, None);
        assert_eq!(m.recall, Some(0.0));
        assert_eq!(m.f1, None);
        assert_eq!(m.accuracy, Some(0.5));
    }

    #[test]
    fn no_positive_truth_leaves_recall_and_auc_absent() {
        let y = [0u8, 0, 0];
        let p = [0.9, 0.2, 0.6];
        let m = compute_metrics(&y, &p, &y).unwrap();
        assert_eq!(m.recall, None);
        assert_eq!(m.roc_auc, None);
        assert!(m.accuracy.is_some());
    }

    #[test]
    fn all_length_four_patterns_match_the_confusion_oracle() {
        // Every (y_true, hard) combination expressible with length-4
        // binary vectors; probabilities 0.9/0.1 realize the hard labels.
        for y_bits in 0..16u8 {
            for h_bits in 0..16u8 {
                let y: Vec<u8> = (0..4).map(|i| (y_bits >> i) & 1).collect();
                let hard: Vec<u8> = (0..4).map(|i| (h_bits >> i) & 1).collect();
                let probs: Vec<f64> =
                    hard.iter().map(|&h| if h == 1 { 0.9 } else { 0.1 }).collect();
                let m = compute_metrics(&y, &probs, &y).unwrap();
                let (acc, prec, rec, f1) = oracle(&y, &hard);
                assert_eq!(m.accuracy, acc, "y={y:?} hard={hard:?}");
                assert_eq!(m.precision, prec, "y={y:?} hard={hard:?}");
                assert_eq!(m.recall, rec, "y={y:?} hard={hard:?}");
                assert_eq!(m.f1, f1, "y={y:?} hard={hard:?}");
            }
        }
    }

    #[test]
    fn midrank_auc_matches_pair_counting_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(404);
        for _ in 0..100 {
            let n = rng.gen_range(2..=200);
            let y: Vec<u8> = (0..n).map(|_| rng.gen_range(0..=1u8)).collect();
            // Coarse grid forces plenty of ties.
            let p: Vec<f64> = (0..n)
                .map(|_| f64::from(rng.gen_range(0..=10u32)) / 10.0)
                .collect();
            let ours = compute_metrics(&y, &p, &y).unwrap().roc_auc;
            let oracle = pair_count_auc(&y, &p);
            match (ours, oracle) {
                (None, None) => {}
                (Some(a), Some(b)) => {
                    assert!((a - b).abs() < 1e-12, "midrank {a} vs pairs {b}")
                }
                other => panic!("presence mismatch: {other:?}"),
            }
        }
    }

    #[test]
    fn moral_agreement_counts_hard_label_matches() {
        let y = [1u8, 1, 0, 0];
        let p = [0.9, 0.2, 0.8, 0.1];
        let moral = [1u8, 0, 0, 0];
        // hard = [1, 0, 1, 0]; matches moral at rows 0, 1, 3.
        let m = compute_metrics(&y, &p, &moral).unwrap();
        assert_eq!(m.moral_agreement, Some(0.75));
    }

    #[test]
    fn rejects_invalid_inputs() {
        assert!(compute_metrics(&[], &[], &[]).is_err());
        assert!(compute_metrics(&[1, 0], &[0.5], &[1, 0]).is_err());
        assert!(compute_metrics(&[2, 0], &[0.5, 0.5], &[1, 0]).is_err());
        assert!(compute_metrics(&[1, 0], &[1.5, 0.5], &[1, 0]).is_err());
        assert!(compute_metrics(&[1, 0], &[f64::NAN, 0.5], &[1, 0]).is_err());
    }
}
