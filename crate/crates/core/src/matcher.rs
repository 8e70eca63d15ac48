//! Duplicate elimination and fuzzy (bounded edit distance) review matching.
//!
//! Candidate texts recovered by OCR are matched against a store corpus:
//! exact matches first, then the unique corpus review within a configurable
//! edit-distance cap. Ties at the minimal distance are surfaced as ambiguous
//! rather than broken automatically.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::corpus::{Review, ReviewCorpus};
use crate::error::Result;

pub const DEFAULT_DISTANCE_CAP: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMethod {
    Exact,
    Fuzzy,
    Ambiguous,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    pub candidate_id: String,
    pub matched_review_id: Option<String>,
    pub distance: Option<usize>,
    pub method: MatchMethod,
}

/// A candidate text to locate inside the corpus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Candidate {
    pub id: String,
    pub title: String,
    pub body: String,
}

/// Canonical text form used for duplicate detection and matching: NFC,
/// trimmed, internal whitespace runs collapsed to single spaces.
pub fn normalize_text(text: &str) -> String {
    let composed: String = text.nfc().collect();
    let mut out = String::with_capacity(composed.len());
    let mut in_space = false;
    for c in composed.trim().chars() {
        if c.is_whitespace() {
            in_space = true;
        } else {
            if in_space && !out.is_empty() {
                out.push(' ');
            }
            in_space = false;
            out.push(c);
        }
    }
    out
}

fn match_key(title: &str, body: &str) -> String {
    format!("{}\n{}", normalize_text(title), normalize_text(body))
}

/// Removes every member of each (normalized title, body) duplicate group.
pub fn dedup(corpus: &ReviewCorpus) -> Result<(ReviewCorpus, usize)> {
    use std::collections::HashMap;
    let mut counts: HashMap<String, usize> = HashMap::new();
    for r in corpus.reviews() {
        *counts.entry(match_key(&r.title, &r.body)).or_insert(0) += 1;
    }
    let mut kept = Vec::new();
    let mut removed = 0usize;
    for r in corpus.reviews() {
        if counts[&match_key(&r.title, &r.body)] > 1 {
            removed += 1;
        } else {
            kept.push(r.clone());
        }
    }
    Ok((ReviewCorpus::new(kept)?, removed))
}

/// Exact Levenshtein distance if it does not exceed `cap`, else `None`.
///
/// Banded dynamic program over the diagonal strip of width 2·cap+1 with
/// early abandon once a whole row exceeds the cap.
pub fn levenshtein_bounded(a: &str, b: &str, cap: usize) -> Option<usize> {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let (n, m) = (a.len(), b.len());
    if n.abs_diff(m) > cap {
        return None;
    }
    if n == 0 {
        return (m <= cap).then_some(m);
    }
    if m == 0 {
        return (n <= cap).then_some(n);
    }

    const BIG: usize = usize::MAX / 2;
    // prev[j] = distance for b-prefix length j at the previous a-prefix row
    let mut prev: Vec<usize> = (0..=m).map(|j| if j <= cap { j } else { BIG }).collect();
    let mut cur = vec![BIG; m + 1];
    for i in 1..=n {
        let lo = i.saturating_sub(cap).max(1);
        let hi = (i + cap).min(m);
        cur[lo - 1] = if i <= cap + (lo - 1) && lo == 1 { i } else { BIG };
        let mut row_min = cur[lo - 1];
        for j in lo..=hi {
            let cost = if a[i - 1] == b[j - 1] { 0 } else { 1 };
            let d = (prev[j] + 1).min(cur[j - 1] + 1).min(prev[j - 1] + cost);
            cur[j] = d;
            row_min = row_min.min(d);
        }
        if hi < m {
            cur[hi + 1] = BIG;
        }
        if row_min > cap {
            return None;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    (prev[m] <= cap).then_some(prev[m])
}

/// Matches each candidate against the deduplicated corpus on the
/// concatenated "title\nbody" text. Output order is the candidate order.
pub fn match_reviews(
    candidates: &[Candidate],
    corpus: &ReviewCorpus,
    cap: usize,
) -> Vec<MatchResult> {
    use std::collections::HashMap;

    let keyed: Vec<(String, &Review)> =
        corpus.reviews().iter().map(|r| (match_key(&r.title, &r.body), r)).collect();
    let mut exact: HashMap<&str, Vec<&Review>> = HashMap::new();
    for (k, r) in &keyed {
        exact.entry(k.as_str()).or_default().push(r);
    }

    candidates
        .par_iter()
        .map(|cand| {
            let key = match_key(&cand.title, &cand.body);
            if let Some(hits) = exact.get(key.as_str()) {
                return if hits.len() == 1 {
                    MatchResult {
                        candidate_id: cand.id.clone(),
                        matched_review_id: Some(hits[0].review_id.clone()),
                        distance: Some(0),
                        method: MatchMethod::Exact,
                    }
                } else {
                    MatchResult {
                        candidate_id: cand.id.clone(),
                        matched_review_id: None,
                        distance: Some(0),
                        method: MatchMethod::Ambiguous,
                    }
                };
            }

            let key_len = key.chars().count();
            let mut best: Option<usize> = None;
            let mut best_review: Option<&Review> = None;
            let mut tie = false;
            for (k, r) in &keyed {
                // length pre-filter; never changes results, only skips work
                if k.chars().count().abs_diff(key_len) > cap {
                    continue;
                }
                let probe_cap = best.map_or(cap, |b| b.min(cap));
                if let Some(d) = levenshtein_bounded(&key, k, probe_cap) {
                    match best {
                        Some(b) if d == b => tie = true,
                        Some(b) if d < b => {
                            best = Some(d);
                            best_review = Some(r);
                            tie = false;
                        }
                        None => {
                            best = Some(d);
                            best_review = Some(r);
                            tie = false;
                        }
                        _ => {}
                    }
                }
            }
            match (best, tie) {
                (Some(_), true) => MatchResult {
                    candidate_id: cand.id.clone(),
                    matched_review_id: None,
                    distance: best,
                    method: MatchMethod::Ambiguous,
                },
                (Some(d), false) => MatchResult {
                    candidate_id: cand.id.clone(),
                    matched_review_id: best_review.map(|r| r.review_id.clone()),
                    distance: Some(d),
                    method: MatchMethod::Fuzzy,
                },
                (None, _) => MatchResult {
                    candidate_id: cand.id.clone(),
                    matched_review_id: None,
                    distance: None,
                    method: MatchMethod::None,
                },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Review;

    fn review(id: &str, title: &str, body: &str) -> Review {
        Review {
            review_id: id.into(),
            app_id: "a".into(),
            reviewer_id: "u".into(),
            title: title.into(),
            body: body.into(),
            rating: 5,
            timestamp: 0,
            helpful_votes: 0,
            unhelpful_votes: 0,
            label: None,
        }
    }

    /// Plain full-matrix Levenshtein, independent of the banded path.
    fn levenshtein_oracle(a: &str, b: &str) -> usize {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        let mut dp = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for (i, row) in dp.iter_mut().enumerate() {
            row[0] = i;
        }
        for (j, cell) in dp[0].iter_mut().enumerate() {
            *cell = j;
        }
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                let cost = usize::from(a[i - 1] != b[j - 1]);
                dp[i][j] = (dp[i - 1][j] + 1).min(dp[i][j - 1] + 1).min(dp[i - 1][j - 1] + cost);
            }
        }
        dp[a.len()][b.len()]
    }

    #[test]
    fn levenshtein_examples() {
        assert_eq!(levenshtein_bounded("abc", "abc", 10), Some(0));
        assert_eq!(levenshtein_bounded("kitten", "sitting", 10), Some(3));
        assert_eq!(levenshtein_oracle("kitten", "sitting"), 3);
        assert_eq!(levenshtein_bounded("", "abcdefghijkl", 10), None);
    }

    #[test]
    fn levenshtein_matches_oracle_under_cap() {
        let words = ["", "a", "ab", "review", "reviews", "fake review", "rev1ew", "xyzzy"];
        for a in words {
            for b in words {
                let d = levenshtein_oracle(a, b);
                for cap in 0..12 {
                    let got = levenshtein_bounded(a, b, cap);
                    if d <= cap {
                        assert_eq!(got, Some(d), "a={a:?} b={b:?} cap={cap}");
                    } else {
                        assert_eq!(got, None, "a={a:?} b={b:?} cap={cap}");
                    }
                }
                assert_eq!(levenshtein_bounded(a, b, 20), levenshtein_bounded(b, a, 20));
            }
        }
    }

    #[test]
    fn dedup_removes_whole_groups() {
        let corpus = ReviewCorpus::new(vec![
            review("r1", "Great", "Love it"),
            review("r2", "Great", "Love it"),
            review("r3", "Meh", "It is ok"),
        ])
        .unwrap();
        let (deduped, removed) = dedup(&corpus).unwrap();
        assert_eq!(deduped.len(), 1);
        assert_eq!(removed, 2);
        assert_eq!(deduped.reviews()[0].review_id, "r3");
    }

    #[test]
    fn dedup_identity_on_distinct_texts() {
        let corpus =
            ReviewCorpus::new(vec![review("r1", "A", "one"), review("r2", "B", "two")]).unwrap();
        let (deduped, removed) = dedup(&corpus).unwrap();
        assert_eq!(deduped.len(), 2);
        assert_eq!(removed, 0);
    }

    #[test]
    fn dedup_normalizes_whitespace() {
        // trailing whitespace only; oracle: normalize_text maps both to "Love it"
        let corpus = ReviewCorpus::new(vec![
            review("r1", "Great", "Love  it "),
            review("r2", "Great ", "Love it"),
            review("r3", "Other", "text"),
        ])
        .unwrap();
        assert_eq!(normalize_text("Love  it "), normalize_text("Love it"));
        let (deduped, removed) = dedup(&corpus).unwrap();
        assert_eq!(deduped.len(), 1);
        assert_eq!(removed, 2);
    }

    #[test]
    fn match_exact_fuzzy_ambiguous_none() {
        let corpus = ReviewCorpus::new(vec![
            review("r1", "Great app", "Works fine on my phone every day"),
            review("r2", "Terrible", "Crashes constantly and eats battery fast"),
        ])
        .unwrap();
        let candidates = vec![
            Candidate {
                id: "c1".into(),
                title: "Great app".into(),
                body: "Works fine on my phone every day".into(),
            },
            Candidate {
                id: "c2".into(),
                title: "Great opp".into(),
                body: "Works fine on my ph0ne every day".into(),
            },
            Candidate {
                id: "c3".into(),
                title: "zzzzzzzzzzzzzzzzzz".into(),
                body: "qqqqqqqqqqqqqqqqqqqqqqqqqqqqqq".into(),
            },
        ];
        let results = match_reviews(&candidates, &corpus, 10);
        assert_eq!(results[0].method, MatchMethod::Exact);
        assert_eq!(results[0].matched_review_id.as_deref(), Some("r1"));
        assert_eq!(results[1].method, MatchMethod::Fuzzy);
        assert_eq!(results[1].matched_review_id.as_deref(), Some("r1"));
        assert_eq!(results[1].distance, Some(2));
        assert_eq!(results[2].method, MatchMethod::None);
    }

    #[test]
    fn equidistant_candidates_are_ambiguous() {
        let corpus = ReviewCorpus::new(vec![
            review("r1", "aaaa aaaa aaaa", "xxxxxxxxxxxxxxxxxxx"),
            review("r2", "aaaa aaaa aaab", "xxxxxxxxxxxxxxxxxxx"),
        ])
        .unwrap();
        // one edit from either corpus review
        let cand = Candidate {
            id: "c".into(),
            title: "aaaa aaaa aaac".into(),
            body: "xxxxxxxxxxxxxxxxxxx".into(),
        };
        let results = match_reviews(&[cand], &corpus, 5);
        assert_eq!(results[0].method, MatchMethod::Ambiguous);
        assert!(results[0].matched_review_id.is_none());
    }
}
