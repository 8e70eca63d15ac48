//! Random forest: seeded bootstrap resamples plus per-node feature
//! subsampling, scored by averaging tree leaf fractions.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{train_tree_on, TreeModel, TreeParams};
use super::FeatureMatrix;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_for};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub tree: TreeParams,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self { n_estimators: 100, tree: TreeParams::default(), bootstrap: true, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    trees: Vec<TreeModel>,
    n_features: usize,
}

/// Trains `n_estimators` trees, each on its own seeded bootstrap resample.
/// Tree order is fixed by tree index, independent of scheduling.
pub fn train_forest(x: &FeatureMatrix, y: &[bool], params: &ForestParams) -> Result<ForestModel> {
    if params.n_estimators == 0 {
        return Err(Error::InvalidParameter("n_estimators must be at least 1".into()));
    }
    let pos = y.iter().filter(|&&t| t).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::DegenerateSample("forest training needs both classes".into()));
    }
    let n = x.n_rows();
    let trees: Vec<TreeModel> = (0..params.n_estimators)
        .into_par_iter()
        .map(|t| {
            let tree_seed = derive_seed(params.seed, &[0x0072_6565, t as u64]);
            let indices: Vec<u32> = if params.bootstrap {
                let mut rng = rng_for(tree_seed, &[1]);
                (0..n).map(|_| rng.gen_range(0..n) as u32).collect()
            } else {
                (0..n as u32).collect()
            };
            let tree_params = TreeParams { seed: tree_seed, ..params.tree.clone() };
            train_tree_on(x, y, &indices, &tree_params)
        })
        .collect::<Result<_>>()?;
    Ok(ForestModel { trees, n_features: x.n_cols() })
}

impl ForestModel {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    /// Mean of the trees' leaf scores per row.
    pub fn predict_score(&self, x: &FeatureMatrix) -> Vec<f64> {
        let per_tree: Vec<Vec<f64>> =
            self.trees.par_iter().map(|t| t.predict_score(x)).collect();
        let mut out = vec![0.0; x.n_rows()];
        // fixed summation order over tree index
        for scores in &per_tree {
            for (o, s) in out.iter_mut().zip(scores) {
                *o += s;
            }
        }
        let k = self.trees.len() as f64;
        for o in out.iter_mut() {
            *o /= k;
        }
        out
    }

    /// Split counts summed across all trees, normalized to 1.
    pub fn feature_importance(&self) -> (Vec<f64>, bool) {
        let mut counts = vec![0u64; self.n_features];
        let mut total = 0u64;
        for tree in &self.trees {
            total += tree.split_counts(&mut counts);
        }
        if total == 0 {
            return (vec![0.0; self.n_features], true);
        }
        (counts.iter().map(|&c| c as f64 / total as f64).collect(), false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::tree::{train_tree, MaxFeatures};

    fn separable_data(n: usize) -> (FeatureMatrix, Vec<bool>) {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let fake = i % 2 == 0;
                let base = if fake { 10.0 } else { 0.0 };
                vec![base + (i % 5) as f64 * 0.1, (i % 7) as f64]
            })
            .collect();
        let y = (0..n).map(|i| i % 2 == 0).collect();
        (FeatureMatrix::from_rows(rows).unwrap(), y)
    }

    #[test]
    fn degenerate_forest_equals_tree() {
        let (x, y) = separable_data(30);
        let params = ForestParams {
            n_estimators: 1,
            bootstrap: false,
            seed: 5,
            tree: TreeParams { max_features: MaxFeatures::All, seed: 5, ..TreeParams::default() },
        };
        let forest = train_forest(&x, &y, &params).unwrap();
        let mut tp = params.tree.clone();
        tp.seed = derive_seed(params.seed, &[0x0072_6565, 0]);
        let tree = train_tree(&x, &y, &tp).unwrap();
        assert_eq!(forest.predict_score(&x), tree.predict_score(&x));
    }

    #[test]
    fn same_seed_same_model() {
        let (x, y) = separable_data(50);
        let params = ForestParams {
            n_estimators: 8,
            seed: 123,
            tree: TreeParams { max_features: MaxFeatures::Sqrt, ..TreeParams::default() },
            ..ForestParams::default()
        };
        let a = train_forest(&x, &y, &params).unwrap();
        let b = train_forest(&x, &y, &params).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.predict_score(&x), b.predict_score(&x));
    }

    #[test]
    fn separable_data_high_accuracy() {
        let (x, y) = separable_data(200);
        let params = ForestParams { n_estimators: 100, seed: 1, ..ForestParams::default() };
        let forest = train_forest(&x, &y, &params).unwrap();
        let scores = forest.predict_score(&x);
        let correct = scores
            .iter()
            .zip(&y)
            .filter(|(&s, &t)| (s >= 0.5) == t)
            .count();
        assert!(correct as f64 / y.len() as f64 >= 0.99);
    }

    #[test]
    fn scores_bounded() {
        let (x, y) = separable_data(60);
        let forest =
            train_forest(&x, &y, &ForestParams { n_estimators: 15, ..ForestParams::default() })
                .unwrap();
        for s in forest.predict_score(&x) {
            assert!((0.0..=1.0).contains(&s));
        }
    }

    #[test]
    fn single_class_errors() {
        let (x, _) = separable_data(10);
        let y = vec![true; 10];
        assert!(train_forest(&x, &y, &ForestParams::default()).is_err());
    }

    #[test]
    fn importance_sums_to_one() {
        let (x, y) = separable_data(80);
        let forest =
            train_forest(&x, &y, &ForestParams { n_estimators: 20, ..ForestParams::default() })
                .unwrap();
        let (imp, degenerate) = forest.feature_importance();
        assert!(!degenerate);
        assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}
