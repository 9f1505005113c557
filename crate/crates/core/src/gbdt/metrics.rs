use serde::{Deserialize, Serialize};

use super::{GbdtError, Result};

/// Test-set classification metrics, all in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub auc: f64,
    pub accuracy: f64,
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
}

impl Metrics {
    pub const NAMES: [&'static str; 5] = ["AUC", "Accuracy", "Recall", "Precision", "F1"];

    pub fn values(&self) -> [f64; 5] {
        [self.auc, self.accuracy, self.recall, self.precision, self.f1]
    }

    pub fn from_values(v: [f64; 5]) -> Self {
        Self { auc: v[0], accuracy: v[1], recall: v[2], precision: v[3], f1: v[4] }
    }
}

/// Area under the ROC curve via the Mann-Whitney U statistic, with midranks
/// for tied scores.
pub fn roc_auc(y_true: &[u8], y_prob: &[f64]) -> Result<f64> {
    if y_true.len() != y_prob.len() {
        return Err(GbdtError::LengthMismatch(y_true.len(), y_prob.len()));
    }
    let n_pos = y_true.iter().filter(|&&y| y == 1).count();
    let n_neg = y_true.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(GbdtError::DegenerateAuc);
    }
    let mut order: Vec<usize> = (0..y_prob.len()).collect();
    order.sort_by(|&a, &b| y_prob[a].total_cmp(&y_prob[b]));

    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && y_prob[order[j + 1]] == y_prob[order[i]] {
            j += 1;
        }
        // ranks i+1..=j+1 share their mean
        let midrank = (i + j + 2) as f64 / 2.0;
        let tied_pos = order[i..=j].iter().filter(|&&k| y_true[k] == 1).count();
        rank_sum_pos += midrank * tied_pos as f64;
        i = j + 1;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Metrics at a probability threshold; a row is predicted churn when its
/// probability is strictly above `threshold`.
pub fn evaluate(y_true: &[u8], y_prob: &[f64], threshold: f64) -> Result<Metrics> {
    if y_true.len() != y_prob.len() || y_true.is_empty() {
        return Err(GbdtError::LengthMismatch(y_true.len(), y_prob.len()));
    }
    let auc = roc_auc(y_true, y_prob)?;
    let (mut tp, mut fp, mut tn, mut fn_) = (0usize, 0usize, 0usize, 0usize);
    for (&y, &p) in y_true.iter().zip(y_prob) {
        match (y == 1, p > threshold) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (false, false) => tn += 1,
            (true, false) => fn_ += 1,
        }
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    Ok(Metrics {
        auc,
        accuracy: ratio(tp + tn, y_true.len()),
        recall: ratio(tp, tp + fn_),
        precision: ratio(tp, tp + fp),
        f1: ratio(2 * tp, 2 * tp + fp + fn_),
    })
}
