//! Repeated stratified k-fold cross-validation with in-fold preprocessing.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{auc_roc, evaluate};
use super::{FeatureMatrix, ModelSpec};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_for};

pub const DEFAULT_FOLDS: usize = 10;
pub const DEFAULT_REPEATS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CVConfig {
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
}

impl Default for CVConfig {
    fn default() -> Self {
        Self { folds: DEFAULT_FOLDS, repeats: DEFAULT_REPEATS, seed: 0 }
    }
}

/// Where preprocessing statistics are fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PreprocessScope {
    /// Fit the scaler on each training fold only (no leakage).
    #[default]
    Fold,
    /// Fit once on the whole dataset before splitting.
    Global,
}

/// Mean and standard deviation of one metric over all folds x repeats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct MetricSummary {
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub defined: usize,
    /// Folds where the metric was 0/0 and therefore flagged, not zeroed.
    pub undefined: usize,
}

fn summarize(values: &[Option<f64>]) -> MetricSummary {
    let defined: Vec<f64> = values.iter().flatten().copied().collect();
    let undefined = values.len() - defined.len();
    if defined.is_empty() {
        return MetricSummary { mean: None, sd: None, defined: 0, undefined };
    }
    let n = defined.len() as f64;
    let mean = defined.iter().sum::<f64>() / n;
    let sd = (defined.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
    MetricSummary { mean: Some(mean), sd: Some(sd), defined: defined.len(), undefined }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CVReport {
    pub precision: MetricSummary,
    pub recall: MetricSummary,
    pub f1: MetricSummary,
    pub accuracy: MetricSummary,
    pub auc: MetricSummary,
    pub folds_evaluated: usize,
}

/// Seeded stratified k-fold assignment: per class, shuffled indices are
/// dealt round-robin, so each fold's class counts differ by at most one.
pub fn stratified_kfold(y: &[bool], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let pos: Vec<usize> = (0..y.len()).filter(|&i| y[i]).collect();
    let neg: Vec<usize> = (0..y.len()).filter(|&i| !y[i]).collect();
    if pos.len() < k || neg.len() < k {
        return Err(Error::InsufficientData(format!(
            "stratified {k}-fold needs at least {k} samples per class (have {} fake, {} regular)",
            pos.len(),
            neg.len()
        )));
    }
    let mut folds = vec![Vec::new(); k];
    for (class_tag, class_indices) in [(0u64, pos), (1u64, neg)] {
        let mut shuffled = class_indices;
        let mut rng = rng_for(seed, &[0xf01d, class_tag]);
        fisher_yates(&mut shuffled, &mut rng);
        for (pos_in_class, idx) in shuffled.into_iter().enumerate() {
            folds[pos_in_class % k].push(idx);
        }
    }
    for fold in folds.iter_mut() {
        fold.sort_unstable();
    }
    Ok(folds)
}

pub(crate) fn fisher_yates<T>(items: &mut [T], rng: &mut impl rand::Rng) {
    for i in (1..items.len()).rev() {
        let j = rng.gen_range(0..=i);
        items.swap(i, j);
    }
}

/// Generic row unit-norm scaling (mirrors the 15-column contract in
/// `featurizer` for arbitrary width, as needed after feature elimination).
pub(crate) fn normalize_rows_generic(m: &mut FeatureMatrix) {
    for i in 0..m.n_rows() {
        let row = m.row_mut(i);
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in row.iter_mut() {
                *x /= norm;
            }
        }
    }
}

pub(crate) struct GenericScaler {
    mean: Vec<f64>,
    sd: Vec<f64>,
}

impl GenericScaler {
    pub(crate) fn fit(m: &FeatureMatrix) -> Self {
        let (n, d) = (m.n_rows() as f64, m.n_cols());
        let mut mean = vec![0.0; d];
        for i in 0..m.n_rows() {
            for (s, x) in mean.iter_mut().zip(m.row(i)) {
                *s += x;
            }
        }
        for s in mean.iter_mut() {
            *s /= n;
        }
        let mut sd = vec![0.0; d];
        for i in 0..m.n_rows() {
            for ((s, x), mu) in sd.iter_mut().zip(m.row(i)).zip(&mean) {
                *s += (x - mu) * (x - mu);
            }
        }
        for s in sd.iter_mut() {
            *s = (*s / n).sqrt();
        }
        Self { mean, sd }
    }

    pub(crate) fn transform(&self, m: &mut FeatureMatrix) {
        for i in 0..m.n_rows() {
            for ((x, mu), s) in m.row_mut(i).iter_mut().zip(&self.mean).zip(&self.sd) {
                *x = (*x - mu) / if *s > 0.0 { *s } else { 1.0 };
            }
        }
    }
}

pub(crate) struct FoldOutcome {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub accuracy: Option<f64>,
    pub auc: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn run_fold(
    x: &FeatureMatrix,
    y: &[bool],
    train_idx: &[usize],
    test_idx: &[usize],
    spec: &ModelSpec,
    scope: PreprocessScope,
    fold_seed: u64,
    threshold: f64,
) -> Result<FoldOutcome> {
    let mut x_train = x.select_rows(train_idx);
    let mut x_test = x.select_rows(test_idx);
    normalize_rows_generic(&mut x_train);
    normalize_rows_generic(&mut x_test);
    if scope == PreprocessScope::Fold {
        let scaler = GenericScaler::fit(&x_train);
        scaler.transform(&mut x_train);
        scaler.transform(&mut x_test);
    }
    let y_train: Vec<bool> = train_idx.iter().map(|&i| y[i]).collect();
    let y_test: Vec<bool> = test_idx.iter().map(|&i| y[i]).collect();

    let model = spec.train_seeded(&x_train, &y_train, fold_seed)?;
    let scores = model.predict_score(&x_test)?;
    let (_, m) = evaluate(&y_test, &scores, threshold);
    let auc = auc_roc(&y_test, &scores).ok();
    Ok(FoldOutcome {
        precision: m.precision,
        recall: m.recall,
        f1: m.f1,
        accuracy: m.accuracy,
        auc,
    })
}

/// Repeated stratified k-fold evaluation of one model spec.
///
/// Each repeat draws its own seeded partition; each fold derives its own
/// training seed, so the result is reproducible and independent of worker
/// scheduling.
pub fn cross_validate(
    x: &FeatureMatrix,
    y: &[bool],
    spec: &ModelSpec,
    cv: &CVConfig,
    scope: PreprocessScope,
) -> Result<CVReport> {
    if cv.folds < 2 || cv.repeats < 1 {
        return Err(Error::InvalidParameter("cv needs folds >= 2 and repeats >= 1".into()));
    }
    let mut x_prepared;
    let x_ref = if scope == PreprocessScope::Global {
        x_prepared = x.clone();
        normalize_rows_generic(&mut x_prepared);
        let scaler = GenericScaler::fit(&x_prepared);
        scaler.transform(&mut x_prepared);
        &x_prepared
    } else {
        x
    };

    let mut tasks = Vec::new();
    for repeat in 0..cv.repeats {
        let partition_seed = derive_seed(cv.seed, &[0xcf, repeat as u64]);
        let folds = stratified_kfold(y, cv.folds, partition_seed)?;
        for (fold_no, test_idx) in folds.iter().enumerate() {
            let train_idx: Vec<usize> =
                folds.iter().enumerate().filter(|(i, _)| *i != fold_no).flat_map(|(_, f)| f.iter().copied()).collect();
            let fold_seed = derive_seed(cv.seed, &[0xf0, repeat as u64, fold_no as u64]);
            tasks.push((train_idx, test_idx.clone(), fold_seed));
        }
    }

    let outcomes: Vec<FoldOutcome> = tasks
        .par_iter()
        .map(|(train_idx, test_idx, fold_seed)| {
            run_fold(x_ref, y, train_idx, test_idx, spec, scope, *fold_seed, 0.5)
        })
        .collect::<Result<_>>()?;

    Ok(CVReport {
        precision: summarize(&outcomes.iter().map(|o| o.precision).collect::<Vec<_>>()),
        recall: summarize(&outcomes.iter().map(|o| o.recall).collect::<Vec<_>>()),
        f1: summarize(&outcomes.iter().map(|o| o.f1).collect::<Vec<_>>()),
        accuracy: summarize(&outcomes.iter().map(|o| o.accuracy).collect::<Vec<_>>()),
        auc: summarize(&outcomes.iter().map(|o| o.auc).collect::<Vec<_>>()),
        folds_evaluated: outcomes.len(),
    })
}
