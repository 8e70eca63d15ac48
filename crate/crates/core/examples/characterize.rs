//! Compares the fake and regular populations of a synthetic corpus with
//! the characterization statistics: t-tests on reviewer behavior, a rank
//! test on review lengths, and word rank deltas.

use revkit::charstats::{ngram_rank_delta, two_sample_t, wilcoxon_rank_sum};
use revkit::corpus::{build_profiles, Label};
use revkit::syngen::{generate, PopulationParams};

fn main() {
    let corpus = generate(
        &PopulationParams::fake_default(),
        &PopulationParams::regular_default(),
        80,
        900,
        100,
        11,
    )
    .expect("valid parameters");
    let (reviewers, _) = build_profiles(&corpus);

    // reviewer ids carry the population prefix, so profiles split cleanly
    let counts = |prefix: &str| -> Vec<f64> {
        reviewers
            .values()
            .filter(|p| p.reviewer_id.starts_with(prefix))
            .map(|p| p.total_reviews as f64)
            .collect()
    };
    let t = two_sample_t(&counts("fake"), &counts("reg")).expect("two populated samples");
    println!(
        "reviews per reviewer: t = {:.2}, p = {:.2e}, Cohen's d = {:.2}",
        t.statistic,
        t.p_value,
        t.effect_size.unwrap()
    );

    let lengths = |label: Label| -> Vec<f64> {
        corpus
            .reviews()
            .iter()
            .filter(|r| r.label == Some(label))
            .map(|r| r.length_chars() as f64)
            .collect()
    };
    let w = wilcoxon_rank_sum(&lengths(Label::Fake), &lengths(Label::Regular))
        .expect("two populated samples");
    println!(
        "review length: rank-sum W = {:.0}, p = {:.2e}, r = {:.2}",
        w.statistic,
        w.p_value,
        w.effect_size.unwrap()
    );

    let texts = |label: Label| -> Vec<String> {
        corpus
            .reviews()
            .iter()
            .filter(|r| r.label == Some(label))
            .map(|r| format!("{} {}", r.title, r.body))
            .collect()
    };
    let fake_texts = texts(Label::Fake);
    let regular_texts = texts(Label::Regular);
    let fake_refs: Vec<&str> = fake_texts.iter().map(String::as_str).collect();
    let regular_refs: Vec<&str> = regular_texts.iter().map(String::as_str).collect();
    let cmp = ngram_rank_delta(&fake_refs, &regular_refs, 1, 20).expect("non-empty corpora");
    println!("\ntop word rank deltas (negative = more typical of fakes):");
    for row in cmp.common.iter().take(8) {
        println!("  {:<12} fake rank {:>2}, regular rank {:>2}, delta {:+}",
            row.token, row.rank_a, row.rank_b, row.delta);
    }
}
