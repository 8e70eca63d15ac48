//! CART binary decision tree with Gini impurity.
//!
//! Split comparisons are carried out in exact integer arithmetic so the
//! documented tie rule (lowest feature index, then lowest threshold) is
//! bit-reproducible and checkable against a brute-force oracle.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::FeatureMatrix;
use crate::error::{Error, Result};
use crate::seed::rng_for;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    #[default]
    Gini,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    #[default]
    All,
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(&self, d: usize) -> usize {
        match self {
            MaxFeatures::All => d,
            MaxFeatures::Sqrt => (d as f64).sqrt().floor().max(1.0) as usize,
            MaxFeatures::Count(k) => (*k).clamp(1, d),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub criterion: Criterion,
    pub max_depth: Option<u32>,
    pub max_features: MaxFeatures,
    pub min_samples_split: usize,
    pub seed: u64,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            criterion: Criterion::Gini,
            max_depth: None,
            max_features: MaxFeatures::All,
            min_samples_split: 2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum Node {
    Leaf { score: f64 },
    Split { feature: usize, threshold: f64, left: u32, right: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    nodes: Vec<Node>,
    n_features: usize,
}

struct SplitCandidate {
    feature: usize,
    threshold: f64,
    /// numerator of the weighted child impurity: A*nr + B*nl where
    /// A = nl^2 - lp^2 - ln^2 and B likewise for the right child
    impurity_num: u128,
    /// denominator nl*nr
    impurity_den: u128,
}

impl SplitCandidate {
    /// Exact rational comparison of weighted child impurities.
    fn better_than(&self, other: &SplitCandidate) -> bool {
        self.impurity_num * other.impurity_den < other.impurity_num * self.impurity_den
    }

    /// True when the split strictly reduces impurity below the parent's.
    fn improves(&self, n: u128, pos: u128) -> bool {
        let neg = n - pos;
        let parent_num = n * n - pos * pos - neg * neg;
        self.impurity_num * n < parent_num * self.impurity_den
    }
}

fn best_split_for_feature(
    x: &FeatureMatrix,
    y: &[bool],
    indices: &[u32],
    feature: usize,
    scratch: &mut Vec<(f64, bool)>,
) -> Option<SplitCandidate> {
    scratch.clear();
    scratch.extend(indices.iter().map(|&i| (x.get(i as usize, feature), y[i as usize])));
    scratch.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite feature values"));

    let n = indices.len();
    let total_pos = scratch.iter().filter(|(_, l)| *l).count() as u128;
    let mut left_pos: u128 = 0;
    let mut best: Option<SplitCandidate> = None;
    for i in 1..n {
        if scratch[i - 1].1 {
            left_pos += 1;
        }
        if scratch[i].0 <= scratch[i - 1].0 {
            continue; // not a boundary between distinct values
        }
        let nl = i as u128;
        let nr = (n - i) as u128;
        let lp = left_pos;
        let ln_ = nl - lp;
        let rp = total_pos - lp;
        let rn = nr - rp;
        let a = nl * nl - lp * lp - ln_ * ln_;
        let b = nr * nr - rp * rp - rn * rn;
        // midpoint, unless rounding pushes it onto the upper value; the
        // lower value also separates the sides under the <= convention
        let mut threshold = (scratch[i - 1].0 + scratch[i].0) / 2.0;
        if threshold >= scratch[i].0 {
            threshold = scratch[i - 1].0;
        }
        let cand = SplitCandidate {
            feature,
            threshold,
            impurity_num: a * nr + b * nl,
            impurity_den: nl * nr,
        };
        // ascending threshold scan: replace only on strict improvement
        if best.as_ref().is_none_or(|b0| cand.better_than(b0)) {
            best = Some(cand);
        }
    }
    best
}

struct Builder<'a> {
    x: &'a FeatureMatrix,
    y: &'a [bool],
    params: &'a TreeParams,
    rng: rand_chacha::ChaCha8Rng,
    nodes: Vec<Node>,
    scratch: Vec<(f64, bool)>,
    feature_pool: Vec<usize>,
}

impl Builder<'_> {
    fn select_features(&mut self, k: usize) -> Vec<usize> {
        let d = self.x.n_cols();
        if k >= d {
            return (0..d).collect();
        }
        // partial Fisher-Yates, then ascending order for the tie rule
        for i in 0..k {
            let j = self.rng.gen_range(i..d);
            self.feature_pool.swap(i, j);
        }
        let mut chosen: Vec<usize> = self.feature_pool[..k].to_vec();
        chosen.sort_unstable();
        chosen
    }

    fn build(&mut self, indices: &mut Vec<u32>, depth: u32) -> u32 {
        let n = indices.len();
        let pos = indices.iter().filter(|&&i| self.y[i as usize]).count();
        let score = pos as f64 / n as f64;
        let at_depth_limit = self.params.max_depth.is_some_and(|d| depth >= d);
        if pos == 0 || pos == n || n < self.params.min_samples_split || at_depth_limit {
            self.nodes.push(Node::Leaf { score });
            return (self.nodes.len() - 1) as u32;
        }

        let k = self.params.max_features.resolve(self.x.n_cols());
        let features = self.select_features(k);
        let mut best: Option<SplitCandidate> = None;
        for f in features {
            if let Some(cand) = best_split_for_feature(self.x, self.y, indices, f, &mut self.scratch)
            {
                if best.as_ref().is_none_or(|b| cand.better_than(b)) {
                    best = Some(cand);
                }
            }
        }
        let best = match best {
            Some(b) if b.improves(n as u128, pos as u128) => b,
            _ => {
                self.nodes.push(Node::Leaf { score });
                return (self.nodes.len() - 1) as u32;
            }
        };

        let mut left: Vec<u32> = Vec::new();
        let mut right: Vec<u32> = Vec::new();
        for &i in indices.iter() {
            if self.x.get(i as usize, best.feature) <= best.threshold {
                left.push(i);
            } else {
                right.push(i);
            }
        }
        indices.clear();
        indices.shrink_to_fit();

        let placeholder = self.nodes.len();
        self.nodes.push(Node::Leaf { score: f64::NAN });
        let left_id = self.build(&mut left, depth + 1);
        let right_id = self.build(&mut right, depth + 1);
        self.nodes[placeholder] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: left_id,
            right: right_id,
        };
        placeholder as u32
    }
}

/// Trains a CART tree. Leaves store the fake-class fraction of their
/// training samples.
pub fn train_tree(x: &FeatureMatrix, y: &[bool], params: &TreeParams) -> Result<TreeModel> {
    if x.n_rows() == 0 || x.n_rows() != y.len() {
        return Err(Error::InsufficientData("tree training needs at least one sample".into()));
    }
    train_tree_on(x, y, &(0..x.n_rows() as u32).collect::<Vec<_>>(), params)
}

/// Trains on a subset of rows (used for bootstrap resamples).
pub(crate) fn train_tree_on(
    x: &FeatureMatrix,
    y: &[bool],
    indices: &[u32],
    params: &TreeParams,
) -> Result<TreeModel> {
    if indices.is_empty() {
        return Err(Error::InsufficientData("tree training needs at least one sample".into()));
    }
    let mut builder = Builder {
        x,
        y,
        params,
        rng: rng_for(params.seed, &[]),
        nodes: Vec::new(),
        scratch: Vec::new(),
        feature_pool: (0..x.n_cols()).collect(),
    };
    let mut root_indices = indices.to_vec();
    builder.build(&mut root_indices, 0);
    Ok(TreeModel { nodes: builder.nodes, n_features: x.n_cols() })
}

impl TreeModel {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn score_row(&self, row: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { score } => return *score,
                Node::Split { feature, threshold, left, right } => {
                    at = if row[*feature] <= *threshold { *left as usize } else { *right as usize };
                }
            }
        }
    }

    pub fn predict_score(&self, x: &FeatureMatrix) -> Vec<f64> {
        (0..x.n_rows()).map(|i| self.score_row(x.row(i))).collect()
    }

    pub(crate) fn split_counts(&self, counts: &mut [u64]) -> u64 {
        let mut total = 0;
        for node in &self.nodes {
            if let Node::Split { feature, .. } = node {
                counts[*feature] += 1;
                total += 1;
            }
        }
        total
    }

    /// Normalized split counts. The flag marks a leaf-only tree.
    pub fn feature_importance(&self) -> (Vec<f64>, bool) {
        let mut counts = vec![0u64; self.n_features];
        let total = self.split_counts(&mut counts);
        if total == 0 {
            return (vec![0.0; self.n_features], true);
        }
        (counts.iter().map(|&c| c as f64 / total as f64).collect(), false)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix_1d(vals: &[f64]) -> FeatureMatrix {
        FeatureMatrix::from_rows(vals.iter().map(|&v| vec![v]).collect()).unwrap()
    }

    #[test]
    fn pure_data_yields_single_leaf() {
        let x = matrix_1d(&[1.0, 2.0, 3.0]);
        let model = train_tree(&x, &[true, true, true], &TreeParams::default()).unwrap();
        assert_eq!(model.node_count(), 1);
        assert_eq!(model.score_row(&[42.0]), 1.0);
        let (imp, degenerate) = model.feature_importance();
        assert!(degenerate);
        assert_eq!(imp, vec![0.0]);
    }

    #[test]
    fn one_dimensional_perfect_split() {
        let x = matrix_1d(&[0.0, 1.0, 2.0, 3.0]);
        let y = [false, false, true, true];
        let model = train_tree(&x, &y, &TreeParams::default()).unwrap();
        match &model.nodes[0] {
            Node::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 1.5);
            }
            other => panic!("expected root split, got {other:?}"),
        }
        assert_eq!(model.score_row(&[0.5]), 0.0);
        assert_eq!(model.score_row(&[2.5]), 1.0);
    }

    #[test]
    fn single_split_importance() {
        let x = FeatureMatrix::from_rows(vec![
            vec![0.0, 0.0, 0.0, 1.0],
            vec![0.0, 0.0, 0.0, 2.0],
            vec![0.0, 0.0, 0.0, 3.0],
            vec![0.0, 0.0, 0.0, 4.0],
        ])
        .unwrap();
        let y = [false, false, true, true];
        let model = train_tree(&x, &y, &TreeParams::default()).unwrap();
        let (imp, degenerate) = model.feature_importance();
        assert!(!degenerate);
        assert_eq!(imp, vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn adjacent_float_values_still_split() {
        // the midpoint of adjacent representable values rounds onto the
        // upper one; the threshold must fall back to the lower value so
        // neither child is empty
        let lo = 1.0f64;
        let hi = 1.0f64 + f64::EPSILON;
        let x = matrix_1d(&[lo, lo, hi, hi]);
        let y = [false, false, true, true];
        let model = train_tree(&x, &y, &TreeParams::default()).unwrap();
        let scores = model.predict_score(&x);
        assert!(scores.iter().all(|s| s.is_finite()), "{scores:?}");
        assert_eq!(scores, vec![0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn tie_rule_prefers_lowest_feature() {
        // both features split perfectly; feature 0 must win
        let x = FeatureMatrix::from_rows(vec![
            vec![0.0, 10.0],
            vec![1.0, 11.0],
            vec![2.0, 12.0],
            vec![3.0, 13.0],
        ])
        .unwrap();
        let y = [false, false, true, true];
        let model = train_tree(&x, &y, &TreeParams::default()).unwrap();
        match &model.nodes[0] {
            Node::Split { feature, .. } => assert_eq!(*feature, 0),
            other => panic!("expected split, got {other:?}"),
        }
    }

    #[test]
    fn max_depth_limits_tree() {
        let x = matrix_1d(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        let y = [false, true, false, true, false, true, false, true];
        let params = TreeParams { max_depth: Some(1), ..TreeParams::default() };
        let model = train_tree(&x, &y, &params).unwrap();
        // root split plus two leaves at most
        assert!(model.node_count() <= 3);
    }

    #[test]
    fn deterministic_with_fixed_seed() {
        let x = FeatureMatrix::from_rows(
            (0..40).map(|i| vec![(i * 7 % 13) as f64, (i * 3 % 11) as f64]).collect(),
        )
        .unwrap();
        let y: Vec<bool> = (0..40).map(|i| i % 3 == 0).collect();
        let params = TreeParams {
            max_features: MaxFeatures::Count(1),
            seed: 99,
            ..TreeParams::default()
        };
        let a = train_tree(&x, &y, &params).unwrap();
        let b = train_tree(&x, &y, &params).unwrap();
        assert_eq!(a, b);
    }
}
