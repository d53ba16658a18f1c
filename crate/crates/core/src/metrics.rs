//! Occupancy evaluation metrics: balanced accuracy over pooled spot-frame
//! pairs (occupied = positive class) and mean absolute error of per-frame
//! occupied counts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Confusion counts and derived metrics for one evaluation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub balanced_accuracy: f64,
    /// Mean over frames of |predicted occupied count − true occupied count|.
    pub mae_count: f64,
    pub n_frames: usize,
    pub true_positive: u64,
    pub true_negative: u64,
    pub false_positive: u64,
    pub false_negative: u64,
}

/// Compare predicted against true per-frame occupancy vectors.
///
/// Both inputs must have the same frame count and per-frame spot count. When
/// the truth contains only one class, balanced accuracy degrades to that
/// class's rate.
pub fn evaluate(predicted: &[Vec<bool>], truth: &[Vec<bool>]) -> Result<EvalReport> {
    if predicted.len() != truth.len() {
        return Err(Error::Domain(format!(
            "frame count mismatch: {} predicted vs {} truth",
            predicted.len(),
            truth.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::Domain("no frames to evaluate".into()));
    }

    let mut tp = 0u64;
    let mut tn = 0u64;
    let mut fp = 0u64;
    let mut fn_ = 0u64;
    let mut abs_count_error = 0u64;

    for (i, (p, t)) in predicted.iter().zip(truth).enumerate() {
        if p.len() != t.len() {
            return Err(Error::Domain(format!(
                "frame {i}: spot count mismatch ({} predicted vs {} truth)",
                p.len(),
                t.len()
            )));
        }
        for (&pb, &tb) in p.iter().zip(t) {
            match (pb, tb) {
                (true, true) => tp += 1,
                (false, false) => tn += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
            }
        }
        let pc = p.iter().filter(|&&b| b).count() as i64;
        let tc = t.iter().filter(|&&b| b).count() as i64;
        abs_count_error += pc.abs_diff(tc);
    }

    let mut rates = Vec::with_capacity(2);
    if tp + fn_ > 0 {
        rates.push(tp as f64 / (tp + fn_) as f64);
    }
    if tn + fp > 0 {
        rates.push(tn as f64 / (tn + fp) as f64);
    }
    if rates.is_empty() {
        return Err(Error::Domain("no spot-frame pairs to evaluate".into()));
    }
    let balanced_accuracy = rates.iter().sum::<f64>() / rates.len() as f64;

    Ok(EvalReport {
        balanced_accuracy,
        mae_count: abs_count_error as f64 / predicted.len() as f64,
        n_frames: predicted.len(),
        true_positive: tp,
        true_negative: tn,
        false_positive: fp,
        false_negative: fn_,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frames(rows: &[&str]) -> Vec<Vec<bool>> {
        rows.iter()
            .map(|r| r.chars().map(|c| c == '1').collect())
            .collect()
    }

    #[test]
    fn perfect_prediction_scores_one() {
        let t = frames(&["1010", "0110"]);
        let report = evaluate(&t, &t).unwrap();
        assert_eq!(report.balanced_accuracy, 1.0);
        assert_eq!(report.mae_count, 0.0);
        assert_eq!(report.false_positive, 0);
        assert_eq!(report.false_negative, 0);
    }

    #[test]
    fn total_inversion_scores_zero() {
        let t = frames(&["1010", "0110"]);
        let p = frames(&["0101", "1001"]);
        let report = evaluate(&p, &t).unwrap();
        assert_eq!(report.balanced_accuracy, 0.0);
    }

    #[test]
    fn hand_fixture_matches_independent_confusion_counting() {
        let truth = frames(&["1010", "1100", "0001"]);
        let pred = frames(&["1000", "1110", "0000"]);
        let report = evaluate(&pred, &truth).unwrap();

        // independent counting, spelled out pair by pair
        let mut tp = 0u64;
        let mut tn = 0u64;
        let mut fp = 0u64;
        let mut fn_ = 0u64;
        for (p_row, t_row) in pred.iter().zip(&truth) {
            for (p, t) in p_row.iter().zip(t_row) {
                if *t {
                    if *p {
                        tp += 1
                    } else {
                        fn_ += 1
                    }
                } else if *p {
                    fp += 1
                } else {
                    tn += 1
                }
            }
        }
        assert_eq!((tp, tn, fp, fn_), (3, 6, 1, 2));
        let expected_ba =
            (tp as f64 / (tp + fn_) as f64 + tn as f64 / (tn + fp) as f64) / 2.0;
        assert!((report.balanced_accuracy - expected_ba).abs() < 1e-15);
        assert!((report.balanced_accuracy - 0.7285714285714286).abs() < 1e-12);
        assert_eq!(report.mae_count, 1.0);
    }

    #[test]
    fn mismatched_shapes_are_domain_errors() {
        let a = frames(&["10"]);
        let b = frames(&["10", "01"]);
        assert!(evaluate(&a, &b).is_err());
        let c = frames(&["101"]);
        assert!(evaluate(&a, &c).is_err());
        assert!(evaluate(&[], &[]).is_err());
    }

    #[test]
    fn frame_order_does_not_matter() {
        let truth = frames(&["1010", "1100", "0001", "1111"]);
        let pred = frames(&["1000", "1110", "0000", "1011"]);
        let forward = evaluate(&pred, &truth).unwrap();

        let perm = [2usize, 0, 3, 1];
        let pred_p: Vec<Vec<bool>> = perm.iter().map(|&i| pred[i].clone()).collect();
        let truth_p: Vec<Vec<bool>> = perm.iter().map(|&i| truth[i].clone()).collect();
        let shuffled = evaluate(&pred_p, &truth_p).unwrap();

        assert_eq!(forward.balanced_accuracy, shuffled.balanced_accuracy);
        assert_eq!(forward.mae_count, shuffled.mae_count);
    }

    #[test]
    fn single_class_truth_uses_the_present_rate() {
        let truth = frames(&["1111"]);
        let pred = frames(&["1100"]);
        let report = evaluate(&pred, &truth).unwrap();
        assert_eq!(report.balanced_accuracy, 0.5); // recall of the positive class
    }
}
