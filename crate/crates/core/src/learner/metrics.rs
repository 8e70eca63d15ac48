//! Confusion-matrix metrics and ROC AUC. Fake is the positive class.

use serde::{Deserialize, Serialize};

use crate::charstats::average_ranks;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Derived metrics. `None` marks an undefined (0/0) value; undefined values
/// are never coerced to 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Metrics {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub accuracy: Option<f64>,
    pub auc: Option<f64>,
}

/// Thresholds scores (fake when score >= threshold) and derives
/// precision, recall, F1, accuracy. AUC is left unset.
pub fn evaluate(y_true: &[bool], scores: &[f64], threshold: f64) -> (ConfusionMatrix, Metrics) {
    assert_eq!(y_true.len(), scores.len(), "labels and scores must align");
    assert!(!y_true.is_empty(), "cannot evaluate an empty sample");
    let mut cm = ConfusionMatrix { tp: 0, fp: 0, fn_: 0, tn: 0 };
    for (&truth, &score) in y_true.iter().zip(scores) {
        let predicted = score >= threshold;
        match (truth, predicted) {
            (true, true) => cm.tp += 1,
            (false, true) => cm.fp += 1,
            (true, false) => cm.fn_ += 1,
            (false, false) => cm.tn += 1,
        }
    }
    let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        (Some(_), Some(_)) => Some(0.0),
        _ => None,
    };
    let accuracy = Some((cm.tp + cm.tn) as f64 / cm.total() as f64);
    (cm, Metrics { precision, recall, f1, accuracy, auc: None })
}

/// Area under the ROC curve via the rank statistic:
/// P(score_fake > score_regular) + 0.5 * P(equal).
pub fn auc_roc(y_true: &[bool], scores: &[f64]) -> Result<f64> {
    let np = y_true.iter().filter(|&&t| t).count();
    let nn = y_true.len() - np;
    if np == 0 || nn == 0 {
        return Err(Error::DegenerateSample("AUC needs both classes present".into()));
    }
    let ranks = average_ranks(scores);
    let rank_sum_pos: f64 =
        y_true.iter().zip(&ranks).filter(|(&t, _)| t).map(|(_, &r)| r).sum();
    let u = rank_sum_pos - np as f64 * (np as f64 + 1.0) / 2.0;
    Ok(u / (np as f64 * nn as f64))
}
