//! Stress-tests classifiers as the fake share shrinks: a fixed fake set is
//! evaluated against nested regular subsets from 90% fake share down to 2%.

use revkit::corpus::{build_profiles, Label};
use revkit::featurizer::{extract_features, DEFAULT_STORE_LIFETIME_S};
use revkit::learner::{
    CVConfig, Criterion, FeatureMatrix, ForestParams, MaxFeatures, ModelSpec, PreprocessScope,
    TreeParams,
};
use revkit::sweeper::{run_sweep, skew_grid};
use revkit::syngen::{generate, PopulationParams};

fn main() {
    let corpus = generate(
        &PopulationParams::fake_default(),
        &PopulationParams::regular_default(),
        10,
        3000,
        150,
        13,
    )
    .expect("valid parameters");
    let (reviewers, apps) = build_profiles(&corpus);
    let mut fake_rows = Vec::new();
    let mut regular_rows = Vec::new();
    for r in corpus.reviews() {
        let fv = extract_features(
            r,
            &reviewers[&r.reviewer_id],
            &apps[&r.app_id],
            DEFAULT_STORE_LIFETIME_S,
        )
        .expect("profiles cover every review");
        match fv.label {
            Some(Label::Fake) => fake_rows.push(fv.values),
            _ => regular_rows.push(fv.values),
        }
    }
    let fakes = FeatureMatrix::from_fixed(&fake_rows[..fake_rows.len().min(150)]);
    let pool = FeatureMatrix::from_fixed(&regular_rows);
    println!("{} fakes against a pool of {} regular rows", fakes.n_rows(), pool.n_rows());

    let rf = ModelSpec::Forest(ForestParams {
        n_estimators: 15,
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
    let algorithms = [rf, ModelSpec::Gnb];

    let skews: Vec<f64> = skew_grid().into_iter().filter(|&s| s >= 2.0).collect();
    let cv = CVConfig { folds: 5, repeats: 2, seed: 3 };
    let rows = run_sweep(&fakes, &pool, &algorithms, &skews, &cv, PreprocessScope::Fold, 3)
        .expect("pool is large enough");

    println!("\n{:>6} {:<4} {:>10} {:>8} {:>8}", "skew%", "algo", "regulars", "recall", "auc");
    for row in &rows {
        let f = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into());
        println!(
            "{:>6} {:<4} {:>10} {:>8} {:>8}",
            row.skew_percent,
            row.algorithm,
            row.n_regular,
            f(row.metrics.recall),
            f(row.metrics.auc)
        );
    }
}
