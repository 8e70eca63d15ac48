//! Recovers corrupted review texts from a corpus with bounded edit
//! distance matching: exact hits, fuzzy hits, and ambiguous ties.

use rand::Rng;
use revkit::matcher::{dedup, match_reviews, Candidate, DEFAULT_DISTANCE_CAP};
use revkit::seed::rng_for;
use revkit::syngen::{generate, PopulationParams};

fn main() {
    let corpus = generate(
        &PopulationParams::fake_default(),
        &PopulationParams::regular_default(),
        20,
        200,
        40,
        7,
    )
    .expect("valid parameters");
    let (corpus, removed) = dedup(&corpus).expect("dedup");
    println!("corpus of {} reviews after removing {removed} duplicates", corpus.len());

    // candidates: some verbatim, some with a few random character edits
    let mut rng = rng_for(99, &[]);
    let mut candidates = Vec::new();
    for (i, review) in corpus.reviews().iter().take(30).enumerate() {
        let mut body: Vec<char> = review.body.chars().collect();
        let edits = if i % 2 == 0 { 0 } else { rng.gen_range(1..=5) };
        for _ in 0..edits {
            if body.is_empty() {
                break;
            }
            let pos = rng.gen_range(0..body.len());
            body[pos] = '#';
        }
        candidates.push(Candidate {
            id: format!("candidate{i:02}"),
            title: review.title.clone(),
            body: body.into_iter().collect(),
        });
    }

    let results = match_reviews(&candidates, &corpus, DEFAULT_DISTANCE_CAP);
    for r in &results {
        println!(
            "{}: {:?} -> {} (distance {})",
            r.candidate_id,
            r.method,
            r.matched_review_id.as_deref().unwrap_or("-"),
            r.distance.map(|d| d.to_string()).unwrap_or_else(|| "-".into()),
        );
    }
}
