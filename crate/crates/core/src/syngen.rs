//! Seeded synthetic review corpora whose fake and regular populations
//! follow configurable aggregate statistics, so the whole pipeline can be
//! exercised at desk scale without a real dataset.
//!
//! Modeling choices: review counts are shifted-geometric, inter-review gaps
//! exponential, review lengths log-normal with mu = ln(median) and
//! sigma^2 = 2 ln(mean/median). Account lifetime emerges from count x gap
//! draws, keeping the three reviewer statistics mutually consistent.

use rand::distributions::Distribution;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Label, Review, ReviewCorpus};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_for};

/// Aggregate statistics one generated population should reproduce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationParams {
    pub mean_reviews_per_reviewer: f64,
    pub mean_frequency_days: f64,
    pub mean_lifetime_days: f64,
    /// Star fractions, index 0 = 1 star; renormalized at use.
    pub rating_distribution: [f64; 5],
    pub length_median_chars: f64,
    pub length_mean_chars: f64,
}

impl PopulationParams {
    /// Fake-population defaults: ~30 reviews per reviewer, one review per
    /// 78.8 days, 622.3-day lifetime, 70% five-star, length mean 121.3 /
    /// median 111.
    pub fn fake_default() -> Self {
        Self {
            mean_reviews_per_reviewer: 29.9,
            mean_frequency_days: 78.8,
            mean_lifetime_days: 622.3,
            rating_distribution: [0.006, 0.01, 0.05, 0.23, 0.70],
            length_median_chars: 111.0,
            length_mean_chars: 121.3,
        }
    }

    /// Regular-population defaults: 2.5 reviews per reviewer, one review
    /// per 328.9 days, 331.3-day lifetime, length mean 110.8 / median 63.
    pub fn regular_default() -> Self {
        Self {
            mean_reviews_per_reviewer: 2.5,
            mean_frequency_days: 328.9,
            mean_lifetime_days: 331.3,
            rating_distribution: [0.10, 0.04, 0.06, 0.16, 0.65],
            length_median_chars: 63.0,
            length_mean_chars: 110.8,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.length_mean_chars < self.length_median_chars {
            return Err(Error::InvalidParameter(format!(
                "log-normal length needs mean >= median, got mean {} < median {}",
                self.length_mean_chars, self.length_median_chars
            )));
        }
        if self.mean_reviews_per_reviewer < 1.0 {
            return Err(Error::InvalidParameter(
                "mean reviews per reviewer must be at least 1".into(),
            ));
        }
        if self.rating_distribution.iter().any(|&f| f < 0.0)
            || self.rating_distribution.iter().sum::<f64>() <= 0.0
        {
            return Err(Error::InvalidParameter("invalid rating distribution".into()));
        }
        Ok(())
    }

    fn normalized_ratings(&self) -> [f64; 5] {
        let sum: f64 = self.rating_distribution.iter().sum();
        self.rating_distribution.map(|f| f / sum)
    }
}

const VOCAB: &[&str] = &[
    "app", "game", "works", "love", "great", "nice", "play", "screen", "levels", "update",
    "daily", "track", "simple", "super", "little", "recommend", "well", "useful", "idea",
    "kids", "fun", "design", "fast", "smooth", "helpful", "perfect", "interface", "color",
    "scheme", "expense", "tracking", "time", "good", "really", "easy", "best", "free",
    "every", "thing", "amazing",
];

fn sample_rating(fractions: &[f64; 5], rng: &mut impl Rng) -> u8 {
    let draw: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &f) in fractions.iter().enumerate() {
        acc += f;
        if draw < acc {
            return (i + 1) as u8;
        }
    }
    5
}

/// Text of exactly `total_chars` characters split into a short title and a
/// body (the separator is not counted).
fn sample_text(total_chars: usize, rng: &mut impl Rng) -> (String, String) {
    let mut text = String::with_capacity(total_chars + 16);
    while text.chars().count() < total_chars {
        if !text.is_empty() {
            text.push(' ');
        }
        text.push_str(VOCAB[rng.gen_range(0..VOCAB.len())]);
    }
    let text: String = text.chars().take(total_chars).collect();
    let title_len = total_chars.min(2 + rng.gen_range(0..12));
    let title: String = text.chars().take(title_len).collect();
    let body: String = text.chars().skip(title_len).collect();
    (title, body)
}

fn sample_geometric_min1(mean: f64, rng: &mut impl Rng) -> u64 {
    if mean <= 1.0 {
        return 1;
    }
    let p = 1.0 / mean;
    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    // inverse CDF of the shifted geometric
    (u.ln() / (1.0 - p).ln()).floor() as u64 + 1
}

fn zipf_cumulative(n_apps: usize) -> Vec<f64> {
    let mut cum = Vec::with_capacity(n_apps);
    let mut acc = 0.0;
    for k in 1..=n_apps {
        acc += 1.0 / k as f64;
        cum.push(acc);
    }
    let total = acc;
    for c in cum.iter_mut() {
        *c /= total;
    }
    cum
}

fn sample_app(cum: &[f64], rng: &mut impl Rng) -> usize {
    let draw: f64 = rng.gen();
    cum.partition_point(|&c| c < draw).min(cum.len() - 1)
}

fn generate_reviewer(
    reviewer_id: &str,
    label: Label,
    params: &PopulationParams,
    n_apps: usize,
    app_cum: &[f64],
    seed: u64,
) -> Vec<Review> {
    let mut rng = rng_for(seed, &[]);
    let count = sample_geometric_min1(params.mean_reviews_per_reviewer, &mut rng);
    let ratings = params.normalized_ratings();
    let gap_mean_s = params.mean_frequency_days * 86_400.0;
    let exp = rand_distr_exp(gap_mean_s);
    let sigma2 = 2.0 * (params.length_mean_chars / params.length_median_chars).ln();
    let mu = params.length_median_chars.ln();
    let lognormal = rand::distributions::Uniform::new(0.0f64, 1.0);

    // first review lands somewhere inside a nine-year window
    let mut ts = rng.gen_range(0..(9 * 365 * 86_400 - 1)) as f64;
    let mut out = Vec::with_capacity(count as usize);
    for k in 0..count {
        if k > 0 {
            ts += exp(&mut rng);
        }
        let z = gauss(lognormal.sample(&mut rng), lognormal.sample(&mut rng));
        let length = (mu + sigma2.sqrt() * z).exp().round().max(5.0) as usize;
        let (title, body) = sample_text(length.min(2000), &mut rng);
        let rating = sample_rating(&ratings, &mut rng);
        let app = sample_app(app_cum, &mut rng).min(n_apps - 1);
        let helpful: u64 = if rng.gen::<f64>() < 0.02 { rng.gen_range(1..5) } else { 0 };
        out.push(Review {
            review_id: format!("{reviewer_id}-{k:04}"),
            app_id: format!("app{app:05}"),
            reviewer_id: reviewer_id.to_string(),
            title,
            body,
            rating,
            timestamp: ts as i64,
            helpful_votes: helpful,
            unhelpful_votes: 0,
            label: Some(label),
        });
    }
    out
}

fn rand_distr_exp(mean: f64) -> impl Fn(&mut rand_chacha::ChaCha8Rng) -> f64 {
    move |rng| {
        let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        -mean * u.ln()
    }
}

/// Box-Muller from two uniforms.
fn gauss(u1: f64, u2: f64) -> f64 {
    let u1 = u1.max(f64::MIN_POSITIVE);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Generates a labeled corpus with `n_fake_reviewers` fake and
/// `n_regular_reviewers` regular reviewers over `n_apps` shared apps.
/// Same seed, same corpus.
pub fn generate(
    fake: &PopulationParams,
    regular: &PopulationParams,
    n_fake_reviewers: usize,
    n_regular_reviewers: usize,
    n_apps: usize,
    seed: u64,
) -> Result<ReviewCorpus> {
    fake.validate()?;
    regular.validate()?;
    if n_apps == 0 {
        return Err(Error::InvalidParameter("need at least one app".into()));
    }
    let app_cum = zipf_cumulative(n_apps);

    let mut jobs: Vec<(String, Label, &PopulationParams, u64)> = Vec::new();
    for i in 0..n_fake_reviewers {
        jobs.push((
            format!("fake{i:05}"),
            Label::Fake,
            fake,
            derive_seed(seed, &[0xfa, i as u64]),
        ));
    }
    for i in 0..n_regular_reviewers {
        jobs.push((
            format!("reg{i:05}"),
            Label::Regular,
            regular,
            derive_seed(seed, &[0x4e, i as u64]),
        ));
    }

    let reviews: Vec<Review> = jobs
        .par_iter()
        .map(|(id, label, params, rseed)| {
            generate_reviewer(id, *label, params, n_apps, &app_cum, *rseed)
        })
        .flatten()
        .collect();
    ReviewCorpus::new(reviews)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_identical_corpus() {
        let a = generate(
            &PopulationParams::fake_default(),
            &PopulationParams::regular_default(),
            20,
            40,
            15,
            77,
        )
        .unwrap();
        let b = generate(
            &PopulationParams::fake_default(),
            &PopulationParams::regular_default(),
            20,
            40,
            15,
            77,
        )
        .unwrap();
        assert_eq!(a.reviews(), b.reviews());
    }

    #[test]
    fn no_fake_reviewers_means_no_fake_labels() {
        let corpus = generate(
            &PopulationParams::fake_default(),
            &PopulationParams::regular_default(),
            0,
            30,
            10,
            1,
        )
        .unwrap();
        assert!(corpus.reviews().iter().all(|r| r.label == Some(Label::Regular)));
        assert!(!corpus.is_empty());
    }

    #[test]
    fn mean_below_median_rejected() {
        let mut bad = PopulationParams::fake_default();
        bad.length_mean_chars = 50.0;
        assert!(generate(&bad, &PopulationParams::regular_default(), 1, 1, 1, 0).is_err());
    }

    #[test]
    fn rating_fractions_match_configuration() {
        let fake = PopulationParams::fake_default();
        let corpus = generate(&fake, &PopulationParams::regular_default(), 400, 0, 50, 5)
            .unwrap();
        assert!(corpus.len() >= 10_000, "got {} reviews", corpus.len());
        let mut counts = [0usize; 5];
        for r in corpus.reviews() {
            counts[(r.rating - 1) as usize] += 1;
        }
        let expected = fake.normalized_ratings();
        for (i, &c) in counts.iter().enumerate() {
            let frac = c as f64 / corpus.len() as f64;
            assert!(
                (frac - expected[i]).abs() <= 0.02,
                "star {} fraction {frac} vs {}",
                i + 1,
                expected[i]
            );
        }
    }

    #[test]
    fn median_length_tracks_configuration() {
        let regular = PopulationParams::regular_default();
        let corpus = generate(&PopulationParams::fake_default(), &regular, 0, 4000, 50, 6)
            .unwrap();
        let mut lengths: Vec<usize> = corpus.reviews().iter().map(|r| r.length_chars()).collect();
        lengths.sort_unstable();
        let median = lengths[lengths.len() / 2] as f64;
        let target = regular.length_median_chars;
        assert!(
            (median - target).abs() / target <= 0.10,
            "median {median} vs configured {target}"
        );
    }
}
