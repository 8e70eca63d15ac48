//! Supervised classification core: Gaussian naive Bayes, CART decision
//! trees, random forests, repeated stratified cross-validation, recursive
//! feature elimination, grid search, and split-count feature importance.

mod cv;
mod forest;
mod metrics;
mod nb;
mod select;
mod tree;

pub use cv::{cross_validate, stratified_kfold, CVConfig, CVReport, MetricSummary, PreprocessScope};
pub(crate) use cv::fisher_yates;
pub use forest::{train_forest, ForestModel, ForestParams};
pub use metrics::{auc_roc, evaluate, ConfusionMatrix, Metrics};
pub use nb::{train_gnb, NbModel};
pub use select::{default_grid, grid_search, rfecv, GridPoint, GridResult, RfecvResult};
pub use tree::{train_tree, Criterion, MaxFeatures, TreeModel, TreeParams};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major feature matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl FeatureMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Validation("ragged feature matrix".into()));
        }
        let n = rows.len();
        let data = rows.into_iter().flatten().collect();
        Ok(Self { data, rows: n, cols })
    }

    pub fn from_fixed<const D: usize>(rows: &[[f64; D]]) -> Self {
        Self {
            data: rows.iter().flat_map(|r| r.iter().copied()).collect(),
            rows: rows.len(),
            cols: D,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { data: vec![0.0; rows * cols], rows, cols }
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// New matrix keeping only the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self { data, rows: indices.len(), cols: self.cols }
    }

    /// New matrix keeping only the given columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * columns.len());
        for i in 0..self.rows {
            let row = self.row(i);
            for &c in columns {
                data.push(row[c]);
            }
        }
        Self { data, rows: self.rows, cols: columns.len() }
    }
}

/// Which classifier to train.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum ModelSpec {
    Gnb,
    Tree(TreeParams),
    Forest(ForestParams),
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Gnb => "gnb",
            ModelSpec::Tree(_) => "dt",
            ModelSpec::Forest(_) => "rf",
        }
    }

    /// Trains with the spec's own seed replaced by `seed` (CV folds derive
    /// per-fold seeds this way).
    pub fn train_seeded(&self, x: &FeatureMatrix, y: &[bool], seed: u64) -> Result<Model> {
        match self {
            ModelSpec::Gnb => Ok(Model::Gnb(train_gnb(x, y)?)),
            ModelSpec::Tree(params) => {
                let mut p = params.clone();
                p.seed = seed;
                Ok(Model::Tree(train_tree(x, y, &p)?))
            }
            ModelSpec::Forest(params) => {
                let mut p = params.clone();
                p.tree.seed = seed;
                p.seed = seed;
                Ok(Model::Forest(train_forest(x, y, &p)?))
            }
        }
    }

    pub fn train(&self, x: &FeatureMatrix, y: &[bool]) -> Result<Model> {
        match self {
            ModelSpec::Gnb => Ok(Model::Gnb(train_gnb(x, y)?)),
            ModelSpec::Tree(params) => Ok(Model::Tree(train_tree(x, y, params)?)),
            ModelSpec::Forest(params) => Ok(Model::Forest(train_forest(x, y, params)?)),
        }
    }
}

/// A trained classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Gnb(NbModel),
    Tree(TreeModel),
    Forest(ForestModel),
}

impl Model {
    pub fn n_features(&self) -> usize {
        match self {
            Model::Gnb(m) => m.n_features(),
            Model::Tree(m) => m.n_features(),
            Model::Forest(m) => m.n_features(),
        }
    }

    /// Probability-like score of the fake class for each row, in [0, 1].
    pub fn predict_score(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        if x.n_cols() != self.n_features() {
            return Err(Error::DimensionMismatch { expected: self.n_features(), got: x.n_cols() });
        }
        Ok(match self {
            Model::Gnb(m) => m.predict_score(x),
            Model::Tree(m) => m.predict_score(x),
            Model::Forest(m) => m.predict_score(x),
        })
    }

    /// Normalized split counts per feature. The flag is set when the model
    /// has no internal split node at all (or no importance notion, as for
    /// naive Bayes).
    pub fn feature_importance(&self) -> Result<(Vec<f64>, bool)> {
        match self {
            Model::Gnb(_) => Err(Error::InvalidParameter(
                "naive Bayes has no split-count feature importance".into(),
            )),
            Model::Tree(m) => Ok(m.feature_importance()),
            Model::Forest(m) => Ok(m.feature_importance()),
        }
    }
}

/// Serialization envelope for models written to disk.
#[derive(Debug, Serialize, Deserialize)]
pub struct VersionedModel {
    pub format_version: u32,
    pub feature_names: Vec<String>,
    pub model: Model,
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

impl VersionedModel {
    pub fn new(model: Model, feature_names: Vec<String>) -> Self {
        Self { format_version: MODEL_FORMAT_VERSION, feature_names, model }
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let parsed: VersionedModel =
            serde_json::from_str(json).map_err(|e| Error::ModelFormat(e.to_string()))?;
        if parsed.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported model format version {}",
                parsed.format_version
            )));
        }
        Ok(parsed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }
}
