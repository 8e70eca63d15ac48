//! Hyperparameter grid search over the default forest grid, then recursive
//! feature elimination to find the smallest feature set that keeps
//! cross-validated precision within tolerance of the best.

use revkit::corpus::{build_profiles, Label};
use revkit::featurizer::{extract_features, DEFAULT_STORE_LIFETIME_S, FEATURE_NAMES};
use revkit::learner::{
    grid_search, rfecv, CVConfig, Criterion, FeatureMatrix, ForestParams, GridPoint,
    MaxFeatures, ModelSpec, PreprocessScope, TreeParams,
};
use revkit::syngen::{generate, PopulationParams};

fn main() {
    let corpus = generate(
        &PopulationParams::fake_default(),
        &PopulationParams::regular_default(),
        40,
        450,
        80,
        33,
    )
    .expect("valid parameters");
    let (reviewers, apps) = build_profiles(&corpus);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for r in corpus.reviews() {
        let fv = extract_features(
            r,
            &reviewers[&r.reviewer_id],
            &apps[&r.app_id],
            DEFAULT_STORE_LIFETIME_S,
        )
        .expect("profiles cover every review");
        rows.push(fv.values);
        y.push(fv.label == Some(Label::Fake));
    }
    let x = FeatureMatrix::from_fixed(&rows);
    println!("{} rows", x.n_rows());

    // a scaled-down grid so the example finishes quickly
    let mut grid = Vec::new();
    for &n_estimators in &[10, 30] {
        for &max_depth in &[Some(10), None] {
            grid.push(GridPoint {
                criterion: Criterion::Gini,
                n_estimators,
                max_depth,
                max_features: MaxFeatures::Sqrt,
            });
        }
    }
    let cv = CVConfig { folds: 5, repeats: 2, seed: 17 };
    let result = grid_search(&x, &y, &grid, &cv, PreprocessScope::Fold).expect("grid runs");
    println!(
        "best grid point: {} trees, depth {:?} (mean precision {:.4})",
        result.best.n_estimators, result.best.max_depth, result.best_score
    );

    let spec = ModelSpec::Forest(ForestParams {
        n_estimators: 20,
        tree: TreeParams {
            criterion: Criterion::Gini,
            max_depth: Some(12),
            max_features: MaxFeatures::Sqrt,
            min_samples_split: 2,
            seed: 0,
        },
        bootstrap: true,
        seed: 0,
    });
    let selection = rfecv(&x, &y, &spec, &cv, PreprocessScope::Fold).expect("rfecv runs");
    println!("\nelimination curve (features: precision):");
    for point in &selection.curve {
        println!("  {:>2}: {:.4}", point.n_features, point.score);
    }
    let names: Vec<&str> =
        selection.selected.iter().map(|&i| FEATURE_NAMES[i]).collect();
    println!("selected {} features: {}", names.len(), names.join(", "));
}
