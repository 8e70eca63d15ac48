//! Extracts the 15-feature scheme from a synthetic corpus and compares
//! naive Bayes, a single decision tree, and a random forest under repeated
//! stratified cross-validation, then prints forest feature importances.

use revkit::corpus::{build_profiles, Label, ReviewCorpus};
use revkit::featurizer::{extract_features, DEFAULT_STORE_LIFETIME_S, FEATURE_NAMES};
use revkit::learner::{
    cross_validate, CVConfig, Criterion, FeatureMatrix, ForestParams, MaxFeatures, ModelSpec,
    PreprocessScope, TreeParams,
};
use revkit::syngen::{generate, PopulationParams};

fn featurize(corpus: &ReviewCorpus) -> (FeatureMatrix, Vec<bool>) {
    let (reviewers, apps) = build_profiles(corpus);
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
    (FeatureMatrix::from_fixed(&rows), y)
}

fn main() {
    let corpus = generate(
        &PopulationParams::fake_default(),
        &PopulationParams::regular_default(),
        70,
        800,
        120,
        21,
    )
    .expect("valid parameters");
    let (x, y) = featurize(&corpus);
    println!("{} rows, {} fake", x.n_rows(), y.iter().filter(|&&t| t).count());

    let tree = TreeParams {
        criterion: Criterion::Gini,
        max_depth: Some(15),
        max_features: MaxFeatures::All,
        min_samples_split: 2,
        seed: 0,
    };
    let forest = ForestParams {
        n_estimators: 30,
        tree: TreeParams { max_features: MaxFeatures::Sqrt, ..tree.clone() },
        bootstrap: true,
        seed: 0,
    };
    let specs = [
        ModelSpec::Gnb,
        ModelSpec::Tree(tree),
        ModelSpec::Forest(forest.clone()),
    ];

    let cv = CVConfig { folds: 10, repeats: 3, seed: 5 };
    println!("\n{:<4} {:>10} {:>10} {:>10} {:>10}", "", "precision", "recall", "f1", "auc");
    for spec in &specs {
        let report =
            cross_validate(&x, &y, spec, &cv, PreprocessScope::Fold).expect("cv runs");
        let f = |m: revkit::learner::MetricSummary| {
            m.mean.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into())
        };
        println!(
            "{:<4} {:>10} {:>10} {:>10} {:>10}",
            spec.name(),
            f(report.precision),
            f(report.recall),
            f(report.f1),
            f(report.auc)
        );
    }

    let model = ModelSpec::Forest(forest).train(&x, &y).expect("trains");
    let (weights, _) = model.feature_importance().expect("forest has importances");
    let mut ranked: Vec<(&str, f64)> =
        FEATURE_NAMES.iter().copied().zip(weights).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    println!("\ntop features by split count:");
    for (name, w) in ranked.iter().take(5) {
        println!("  {name:<22} {w:.3}");
    }
}
