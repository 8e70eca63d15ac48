//! Generates a small labeled synthetic corpus and prints aggregate
//! statistics next to the configured population targets.

use revkit::corpus::{build_profiles, Label};
use revkit::syngen::{generate, PopulationParams};

fn main() {
    let fake = PopulationParams::fake_default();
    let regular = PopulationParams::regular_default();
    let corpus = generate(&fake, &regular, 100, 1200, 150, 42).expect("valid parameters");

    println!("generated {} reviews", corpus.len());
    let (reviewers, apps) = build_profiles(&corpus);
    println!("{} reviewers over {} apps", reviewers.len(), apps.len());

    for (name, params, label) in
        [("fake", &fake, Label::Fake), ("regular", &regular, Label::Regular)]
    {
        let prefix = if label == Label::Fake { "fake" } else { "reg" };
        let profiles: Vec<_> = reviewers
            .values()
            .filter(|p| p.reviewer_id.starts_with(prefix))
            .collect();
        let mean_reviews = profiles.iter().map(|p| p.total_reviews as f64).sum::<f64>()
            / profiles.len() as f64;
        let mut lengths: Vec<usize> = corpus
            .reviews()
            .iter()
            .filter(|r| r.label == Some(label))
            .map(|r| r.length_chars())
            .collect();
        lengths.sort_unstable();
        let median = lengths[lengths.len() / 2];
        println!(
            "{name}: mean reviews/reviewer {mean_reviews:.1} (target {}), \
             median length {median} chars (target {})",
            params.mean_reviews_per_reviewer, params.length_median_chars
        );
    }

    let sample = &corpus.reviews()[0];
    println!(
        "\nsample review: {} stars, \"{}\" / \"{}...\"",
        sample.rating,
        sample.title,
        sample.body.chars().take(40).collect::<String>()
    );
}
