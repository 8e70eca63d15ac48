//! Class-imbalance stress experiment: a fixed fake set evaluated against
//! nested regular subsets spanning 90% down to 0.1% fake share.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::{
    cross_validate, CVConfig, FeatureMatrix, Metrics, ModelSpec, PreprocessScope,
};
use crate::seed::{derive_seed, rng_for};

/// One (skew, algorithm) evaluation row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub skew_percent: f64,
    pub algorithm: String,
    pub metrics: Metrics,
    pub n_fake: usize,
    pub n_regular: usize,
}

/// The 27 fake-review percentages: 90..10 by tens, 9..1 by ones,
/// 0.9..0.1 by tenths, descending.
pub fn skew_grid() -> Vec<f64> {
    let mut grid = Vec::with_capacity(27);
    grid.extend((1..=9).rev().map(|i| i as f64 * 10.0));
    grid.extend((1..=9).rev().map(|i| i as f64));
    grid.extend((1..=9).rev().map(|i| i as f64 / 10.0));
    grid
}

/// Regular-review count for a skew percentage, rounded to nearest.
pub fn regular_count(n_fake: usize, skew_percent: f64) -> usize {
    (n_fake as f64 * (100.0 - skew_percent) / skew_percent).round() as usize
}

/// Runs the sweep. The regular pool is shuffled once with the seed and each
/// skew's regular subset is a prefix of that shuffle, so subsets nest as
/// the skew decreases. Rows come back ordered by (skew descending,
/// algorithm input order).
#[allow(clippy::too_many_arguments)]
pub fn run_sweep(
    fakes: &FeatureMatrix,
    regular_pool: &FeatureMatrix,
    algorithms: &[ModelSpec],
    skews: &[f64],
    cv: &CVConfig,
    scope: PreprocessScope,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let n_fake = fakes.n_rows();
    if n_fake == 0 {
        return Err(Error::InsufficientData("sweep needs a non-empty fake set".into()));
    }
    let min_skew = skews.iter().cloned().fold(f64::INFINITY, f64::min);
    let needed = regular_count(n_fake, min_skew);
    if regular_pool.n_rows() < needed {
        return Err(Error::InsufficientData(format!(
            "regular pool of {} rows is too small: skew {min_skew}% with {n_fake} fakes needs {needed}",
            regular_pool.n_rows()
        )));
    }

    let mut pool_order: Vec<usize> = (0..regular_pool.n_rows()).collect();
    let mut rng = rng_for(seed, &[0x5eed]);
    crate::learner::fisher_yates(&mut pool_order, &mut rng);

    let mut cells = Vec::new();
    for (si, &skew) in skews.iter().enumerate() {
        for (ai, spec) in algorithms.iter().enumerate() {
            cells.push((si, skew, ai, spec));
        }
    }

    cells
        .par_iter()
        .map(|&(si, skew, ai, spec)| {
            let n_regular = regular_count(n_fake, skew);
            let subset = &pool_order[..n_regular];
            let x = stack(fakes, &regular_pool.select_rows(subset));
            let mut y = vec![true; n_fake];
            y.extend(std::iter::repeat_n(false, n_regular));

            let cell_cv = CVConfig {
                seed: derive_seed(seed, &[0xce11, si as u64, ai as u64]),
                ..*cv
            };
            let report = cross_validate(&x, &y, spec, &cell_cv, scope)?;
            Ok(SweepRow {
                skew_percent: skew,
                algorithm: spec.name().to_string(),
                metrics: Metrics {
                    precision: report.precision.mean,
                    recall: report.recall.mean,
                    f1: report.f1.mean,
                    accuracy: report.accuracy.mean,
                    auc: report.auc.mean,
                },
                n_fake,
                n_regular,
            })
        })
        .collect()
}

fn stack(a: &FeatureMatrix, b: &FeatureMatrix) -> FeatureMatrix {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(a.n_rows() + b.n_rows());
    for i in 0..a.n_rows() {
        rows.push(a.row(i).to_vec());
    }
    for i in 0..b.n_rows() {
        rows.push(b.row(i).to_vec());
    }
    FeatureMatrix::from_rows(rows).expect("equal widths")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::TreeParams;

    #[test]
    fn grid_shape() {
        let grid = skew_grid();
        assert_eq!(grid.len(), 27);
        assert_eq!(grid[0], 90.0);
        assert_eq!(*grid.last().unwrap(), 0.1);
        assert!(grid.contains(&50.0));
        assert!(grid.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn regular_counts() {
        assert_eq!(regular_count(8000, 90.0), 889);
        assert_eq!(regular_count(8000, 50.0), 8000);
        assert_eq!(regular_count(800, 1.0), 79_200);
    }

    #[test]
    fn pool_too_small_names_requirement() {
        let fakes = FeatureMatrix::from_rows(vec![vec![1.0]; 10]).unwrap();
        let pool = FeatureMatrix::from_rows(vec![vec![0.0]; 5]).unwrap();
        let err = run_sweep(
            &fakes,
            &pool,
            &[ModelSpec::Tree(TreeParams::default())],
            &[50.0],
            &CVConfig { folds: 2, repeats: 1, seed: 0 },
            PreprocessScope::Fold,
            0,
        )
        .unwrap_err();
        assert!(err.to_string().contains("needs 10"), "{err}");
    }

    #[test]
    fn sweep_reproducible_and_ordered() {
        let fakes = FeatureMatrix::from_rows((0..40).map(|i| vec![5.0 + (i % 3) as f64]).collect())
            .unwrap();
        let pool = FeatureMatrix::from_rows((0..200).map(|i| vec![-5.0 - (i % 7) as f64]).collect())
            .unwrap();
        let algos = vec![ModelSpec::Tree(TreeParams::default())];
        let cv = CVConfig { folds: 2, repeats: 1, seed: 0 };
        let skews = [80.0, 50.0, 20.0];
        let a = run_sweep(&fakes, &pool, &algos, &skews, &cv, PreprocessScope::Fold, 9).unwrap();
        let b = run_sweep(&fakes, &pool, &algos, &skews, &cv, PreprocessScope::Fold, 9).unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(
            a.iter().map(|r| r.skew_percent).collect::<Vec<_>>(),
            vec![80.0, 50.0, 20.0]
        );
        for (ra, rb) in a.iter().zip(&b) {
            assert_eq!(ra.metrics, rb.metrics);
            assert_eq!(ra.n_regular, rb.n_regular);
        }
        assert_eq!(a[1].n_regular, 40); // balanced point
    }
}
