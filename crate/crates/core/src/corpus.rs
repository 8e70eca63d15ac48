//! Review corpora: loading, validation, and per-reviewer / per-app profiles.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Class label attached to a review.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Fake,
    Regular,
}

/// One store review.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Review {
    pub review_id: String,
    pub app_id: String,
    pub reviewer_id: String,
    pub title: String,
    pub body: String,
    pub rating: u8,
    pub timestamp: i64,
    pub helpful_votes: u64,
    pub unhelpful_votes: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
}

impl Review {
    pub fn validate(&self) -> Result<()> {
        if !(1..=5).contains(&self.rating) {
            return Err(Error::Validation(format!(
                "rating {} out of range 1..=5 (review_id {})",
                self.rating, self.review_id
            )));
        }
        if self.timestamp < 0 {
            return Err(Error::Validation(format!(
                "negative timestamp (review_id {})",
                self.review_id
            )));
        }
        if self.review_id.is_empty() {
            return Err(Error::Validation("empty review_id".into()));
        }
        Ok(())
    }

    /// Character count of title plus body, separator excluded.
    pub fn length_chars(&self) -> usize {
        self.title.chars().count() + self.body.chars().count()
    }
}

/// Per-app metadata from the optional sidecar file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AppMeta {
    pub app_id: String,
    #[serde(default)]
    pub category: Option<String>,
    #[serde(default)]
    pub price_cents: Option<u64>,
}

/// Immutable review collection with reviewer and app indexes.
///
/// Iteration order is canonical (sorted by `review_id`) so every downstream
/// result is deterministic regardless of input order.
#[derive(Debug, Clone)]
pub struct ReviewCorpus {
    reviews: Vec<Review>,
    reviewer_index: BTreeMap<String, Vec<usize>>,
    app_index: BTreeMap<String, Vec<usize>>,
}

impl ReviewCorpus {
    /// Builds a corpus from validated reviews. Fails on duplicate review ids.
    pub fn new(mut reviews: Vec<Review>) -> Result<Self> {
        for r in &reviews {
            r.validate()?;
        }
        reviews.sort_by(|a, b| a.review_id.cmp(&b.review_id));
        for pair in reviews.windows(2) {
            if pair[0].review_id == pair[1].review_id {
                return Err(Error::DuplicateReviewId(pair[0].review_id.clone()));
            }
        }
        let mut reviewer_index: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        let mut app_index: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, r) in reviews.iter().enumerate() {
            reviewer_index.entry(r.reviewer_id.clone()).or_default().push(i);
            app_index.entry(r.app_id.clone()).or_default().push(i);
        }
        Ok(Self { reviews, reviewer_index, app_index })
    }

    pub fn len(&self) -> usize {
        self.reviews.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reviews.is_empty()
    }

    pub fn reviews(&self) -> &[Review] {
        &self.reviews
    }

    pub fn reviewer_ids(&self) -> impl Iterator<Item = &str> {
        self.reviewer_index.keys().map(String::as_str)
    }

    pub fn app_ids(&self) -> impl Iterator<Item = &str> {
        self.app_index.keys().map(String::as_str)
    }

    pub fn reviews_by_reviewer(&self, reviewer_id: &str) -> impl Iterator<Item = &Review> {
        self.reviewer_index
            .get(reviewer_id)
            .into_iter()
            .flatten()
            .map(move |&i| &self.reviews[i])
    }

    pub fn reviews_by_app(&self, app_id: &str) -> impl Iterator<Item = &Review> {
        self.app_index
            .get(app_id)
            .into_iter()
            .flatten()
            .map(move |&i| &self.reviews[i])
    }
}

/// Result of [`load_reviews`]: the corpus plus how many malformed records
/// were skipped (lenient mode only).
#[derive(Debug)]
pub struct LoadReport {
    pub corpus: ReviewCorpus,
    pub skipped: usize,
}

/// Loads a newline-delimited JSON review file.
///
/// In strict mode any malformed or invalid record rejects the whole file,
/// naming the offending line. Otherwise bad records are skipped and counted.
/// Duplicate review ids are an error in both modes.
pub fn load_reviews(path: &Path, strict: bool) -> Result<LoadReport> {
    let file = File::open(path).map_err(|source| Error::Io { path: path.into(), source })?;
    let reader = BufReader::new(file);
    let mut reviews = Vec::new();
    let mut skipped = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| Error::Io { path: path.into(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: std::result::Result<Review, _> = serde_json::from_str(&line);
        let record = match parsed {
            Ok(r) => r,
            Err(e) => {
                if strict {
                    return Err(Error::Malformed { line: lineno + 1, message: e.to_string() });
                }
                skipped += 1;
                continue;
            }
        };
        match record.validate() {
            Ok(()) => reviews.push(record),
            Err(e) => {
                if strict {
                    return Err(Error::Malformed { line: lineno + 1, message: e.to_string() });
                }
                skipped += 1;
            }
        }
    }
    Ok(LoadReport { corpus: ReviewCorpus::new(reviews)?, skipped })
}

/// Loads the optional app metadata sidecar (newline-delimited JSON).
pub fn load_app_meta(path: &Path) -> Result<BTreeMap<String, AppMeta>> {
    let file = File::open(path).map_err(|source| Error::Io { path: path.into(), source })?;
    let reader = BufReader::new(file);
    let mut out = BTreeMap::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| Error::Io { path: path.into(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let meta: AppMeta = serde_json::from_str(&line)
            .map_err(|e| Error::Malformed { line: lineno + 1, message: e.to_string() })?;
        out.insert(meta.app_id.clone(), meta);
    }
    Ok(out)
}

/// Aggregate statistics for one reviewer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewerProfile {
    pub reviewer_id: String,
    pub total_reviews: u64,
    /// Fraction of this reviewer's reviews per star rating, index 0 = 1 star.
    pub per_star_fraction: [f64; 5],
    pub first_ts: i64,
    pub last_ts: i64,
    /// last_ts - first_ts, seconds.
    pub account_lifetime_s: i64,
    /// Mean gap between consecutive reviews; absent for single-review reviewers.
    pub review_frequency_s: Option<f64>,
}

/// Aggregate statistics for one app.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppProfile {
    pub app_id: String,
    pub total_reviews: u64,
    pub per_star_fraction: [f64; 5],
    #[serde(default)]
    pub category: Option<String>,
    #[serde(default)]
    pub price_cents: Option<u64>,
}

fn star_fractions<'a>(reviews: impl Iterator<Item = &'a Review>) -> ([f64; 5], u64) {
    let mut counts = [0u64; 5];
    for r in reviews {
        counts[(r.rating - 1) as usize] += 1;
    }
    let total: u64 = counts.iter().sum();
    let mut frac = [0.0; 5];
    if total > 0 {
        for (f, &c) in frac.iter_mut().zip(&counts) {
            *f = c as f64 / total as f64;
        }
    }
    (frac, total)
}

/// Builds one profile per distinct reviewer and app.
pub fn build_profiles(
    corpus: &ReviewCorpus,
) -> (BTreeMap<String, ReviewerProfile>, BTreeMap<String, AppProfile>) {
    let mut reviewers = BTreeMap::new();
    for id in corpus.reviewer_index.keys() {
        let (per_star_fraction, total) = star_fractions(corpus.reviews_by_reviewer(id));
        let mut timestamps: Vec<i64> =
            corpus.reviews_by_reviewer(id).map(|r| r.timestamp).collect();
        timestamps.sort_unstable();
        let first_ts = *timestamps.first().expect("indexed reviewer has reviews");
        let last_ts = *timestamps.last().expect("indexed reviewer has reviews");
        let lifetime = last_ts - first_ts;
        let frequency = if total >= 2 { Some(lifetime as f64 / (total - 1) as f64) } else { None };
        reviewers.insert(
            id.clone(),
            ReviewerProfile {
                reviewer_id: id.clone(),
                total_reviews: total,
                per_star_fraction,
                first_ts,
                last_ts,
                account_lifetime_s: lifetime,
                review_frequency_s: frequency,
            },
        );
    }

    let mut apps = BTreeMap::new();
    for id in corpus.app_index.keys() {
        let (per_star_fraction, total) = star_fractions(corpus.reviews_by_app(id));
        apps.insert(
            id.clone(),
            AppProfile {
                app_id: id.clone(),
                total_reviews: total,
                per_star_fraction,
                category: None,
                price_cents: None,
            },
        );
    }
    (reviewers, apps)
}

/// Attaches sidecar metadata to already-built app profiles.
pub fn attach_app_meta(apps: &mut BTreeMap<String, AppProfile>, meta: &BTreeMap<String, AppMeta>) {
    for (id, profile) in apps.iter_mut() {
        if let Some(m) = meta.get(id) {
            profile.category = m.category.clone();
            profile.price_cents = m.price_cents;
        }
    }
}
