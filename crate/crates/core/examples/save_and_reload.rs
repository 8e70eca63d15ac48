//! Trains a forest, round-trips it through the versioned JSON model format,
//! and confirms the reloaded model scores identically.

use revkit::corpus::{build_profiles, Label};
use revkit::featurizer::{extract_features, DEFAULT_STORE_LIFETIME_S, FEATURE_NAMES};
use revkit::learner::{
    auc_roc, evaluate, Criterion, FeatureMatrix, ForestParams, MaxFeatures, ModelSpec,
    TreeParams, VersionedModel,
};
use revkit::syngen::{generate, PopulationParams};

fn main() {
    let corpus = generate(
        &PopulationParams::fake_default(),
        &PopulationParams::regular_default(),
        30,
        350,
        60,
        8,
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

    let spec = ModelSpec::Forest(ForestParams {
        n_estimators: 20,
        tree: TreeParams {
            criterion: Criterion::Gini,
            max_depth: Some(12),
            max_features: MaxFeatures::Sqrt,
            min_samples_split: 2,
            seed: 1,
        },
        bootstrap: true,
        seed: 1,
    });
    let model = spec.train(&x, &y).expect("trains");
    let envelope =
        VersionedModel::new(model, FEATURE_NAMES.iter().map(|s| s.to_string()).collect());
    let json = envelope.to_json();
    println!("serialized model: {} bytes", json.len());

    let reloaded = VersionedModel::from_json(&json).expect("round-trips");
    let before = envelope.model.predict_score(&x).expect("scores");
    let after = reloaded.model.predict_score(&x).expect("scores");
    assert_eq!(before, after, "reloaded model must score identically");

    let (confusion, metrics) = evaluate(&y, &after, 0.5);
    println!("confusion: {confusion:?}");
    println!(
        "precision {:?}, recall {:?}, auc {:.4}",
        metrics.precision,
        metrics.recall,
        auc_roc(&y, &after).expect("both classes present")
    );
}
