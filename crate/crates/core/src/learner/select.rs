//! Feature selection (recursive feature elimination with cross-validation)
//! and exhaustive grid search.

use serde::{Deserialize, Serialize};

use super::cv::{cross_validate, CVConfig, PreprocessScope};
use super::tree::{Criterion, MaxFeatures, TreeParams};
use super::{FeatureMatrix, ForestParams, ModelSpec};
use crate::error::{Error, Result};

/// Feature counts whose CV score falls within this tolerance of the best
/// count are eligible; the smallest such set wins.
pub const RFECV_TOLERANCE: f64 = 0.005;

/// One point on the score-vs-feature-count curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RfecvCurvePoint {
    pub n_features: usize,
    pub feature_ids: Vec<usize>,
    pub score: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RfecvResult {
    pub selected: Vec<usize>,
    pub curve: Vec<RfecvCurvePoint>,
}

/// Recursive feature elimination: per round, cross-validate the current
/// feature set, then drop the feature with the lowest split-count
/// importance (model retrained on the full set each round). Scoring is
/// precision, per the optimization target.
pub fn rfecv(
    x: &FeatureMatrix,
    y: &[bool],
    spec: &ModelSpec,
    cv: &CVConfig,
    scope: PreprocessScope,
) -> Result<RfecvResult> {
    if matches!(spec, ModelSpec::Gnb) {
        return Err(Error::InvalidParameter(
            "rfecv needs a model with feature importances; naive Bayes has none".into(),
        ));
    }
    if x.n_cols() < 2 {
        return Err(Error::InsufficientData("rfecv needs at least 2 features".into()));
    }

    let mut active: Vec<usize> = (0..x.n_cols()).collect();
    let mut curve = Vec::new();
    loop {
        let x_sub = x.select_columns(&active);
        let report = cross_validate(&x_sub, y, spec, cv, scope)?;
        let score = report.precision.mean.ok_or_else(|| {
            Error::DegenerateSample("precision undefined on every fold during rfecv".into())
        })?;
        curve.push(RfecvCurvePoint {
            n_features: active.len(),
            feature_ids: active.clone(),
            score,
        });
        if active.len() == 1 {
            break;
        }
        let model = spec.train(&x_sub, y)?;
        let (importance, _) = model.feature_importance()?;
        // least important first; ties resolved to the lowest original id
        let weakest_pos = importance
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(a.0.cmp(&b.0)))
            .map(|(i, _)| i)
            .expect("active set non-empty");
        active.remove(weakest_pos);
    }

    let best = curve.iter().map(|p| p.score).fold(f64::NEG_INFINITY, f64::max);
    let selected = curve
        .iter()
        .filter(|p| p.score >= best - RFECV_TOLERANCE)
        .min_by_key(|p| p.n_features)
        .map(|p| p.feature_ids.clone())
        .expect("curve non-empty");
    Ok(RfecvResult { selected, curve })
}

/// One forest configuration in the search grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub criterion: Criterion,
    pub n_estimators: usize,
    pub max_depth: Option<u32>,
    pub max_features: MaxFeatures,
}

impl GridPoint {
    pub fn to_spec(&self, seed: u64) -> ModelSpec {
        ModelSpec::Forest(ForestParams {
            n_estimators: self.n_estimators,
            bootstrap: true,
            seed,
            tree: TreeParams {
                criterion: self.criterion,
                max_depth: self.max_depth,
                max_features: self.max_features,
                min_samples_split: 2,
                seed,
            },
        })
    }

    fn feature_order(&self) -> u8 {
        match self.max_features {
            MaxFeatures::Sqrt => 0,
            MaxFeatures::All => 1,
            MaxFeatures::Count(_) => 2,
        }
    }
}

/// The default search lattice. Contains the best configuration found in
/// practice: gini, depth 30, sqrt features, 300 trees.
pub fn default_grid() -> Vec<GridPoint> {
    let mut grid = Vec::new();
    for &n_estimators in &[100, 300, 500] {
        for &max_depth in &[Some(10), Some(30), None] {
            for &max_features in &[MaxFeatures::Sqrt, MaxFeatures::All] {
                grid.push(GridPoint {
                    criterion: Criterion::Gini,
                    n_estimators,
                    max_depth,
                    max_features,
                });
            }
        }
    }
    grid
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridResult {
    pub best: GridPoint,
    pub best_score: f64,
    /// (configuration, mean precision) for every grid point, in grid order.
    pub table: Vec<(GridPoint, f64)>,
}

/// Exhaustive cross-validated search over a parameter grid, scored by mean
/// precision. Ties break toward fewer trees, then shallower depth, then
/// sqrt-before-all feature sampling.
pub fn grid_search(
    x: &FeatureMatrix,
    y: &[bool],
    grid: &[GridPoint],
    cv: &CVConfig,
    scope: PreprocessScope,
) -> Result<GridResult> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty parameter grid".into()));
    }
    let mut table = Vec::with_capacity(grid.len());
    for point in grid {
        let spec = point.to_spec(cv.seed);
        let report = cross_validate(x, y, &spec, cv, scope)?;
        let score = report.precision.mean.unwrap_or(f64::NEG_INFINITY);
        table.push((point.clone(), score));
    }
    let best = table
        .iter()
        .min_by(|(pa, sa), (pb, sb)| {
            sb.partial_cmp(sa)
                .unwrap()
                .then(pa.n_estimators.cmp(&pb.n_estimators))
                .then(
                    pa.max_depth
                        .unwrap_or(u32::MAX)
                        .cmp(&pb.max_depth.unwrap_or(u32::MAX)),
                )
                .then(pa.feature_order().cmp(&pb.feature_order()))
        })
        .expect("non-empty grid");
    Ok(GridResult { best: best.0.clone(), best_score: best.1, table })
}
