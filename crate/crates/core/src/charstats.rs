//! Characterization statistics comparing fake and regular review subsets:
//! Spearman rank correlation, rank deltas, two-sample t-test with Cohen's d,
//! Wilcoxon rank-sum with effect size r, 2x2 chi-square, and n-gram
//! rank-delta analysis.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};

/// Embedded English stopword list used by the n-gram pipeline.
pub const STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
    "by", "did", "do", "does", "doing", "down", "during", "each", "few", "for", "from", "further",
    "had", "has", "have", "having", "he", "her", "here", "hers", "herself", "him", "himself",
    "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just", "me", "more",
    "most", "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once", "only", "or",
    "other", "our", "ours", "ourselves", "out", "over", "own", "same", "she", "should", "so",
    "some", "such", "than", "that", "the", "their", "theirs", "them", "themselves", "then",
    "there", "these", "they", "this", "those", "through", "to", "too", "under", "until", "up",
    "very", "was", "we", "were", "what", "when", "where", "which", "while", "who", "whom", "why",
    "will", "with", "you", "your", "yours", "yourself", "yourselves",
];

/// Category rank pair consumed by the rank analyses.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CategoryRank {
    pub category: String,
    pub rank_fake: u32,
    pub rank_official: u32,
}

/// Outcome of one statistical test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Cohen's d or rank-test r, where defined.
    pub effect_size: Option<f64>,
}

/// One shared token in an n-gram rank comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankDeltaRow {
    pub token: String,
    pub rank_a: i64,
    pub rank_b: i64,
    pub delta: i64,
}

/// Average ranks (1-based) with ties sharing their mean rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| xs[i].partial_cmp(&xs[j]).expect("finite values"));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

fn t_two_tailed_p(t: f64, df: f64) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    2.0 * dist.cdf(-t.abs())
}

/// Spearman rank correlation with average-rank tie handling; two-tailed p
/// from the t approximation with n-2 degrees of freedom.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<TestResult> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "spearman needs equal-length inputs of at least 3, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let rho = pearson(&rx, &ry)
        .ok_or_else(|| Error::DegenerateSample("constant input: correlation undefined".into()))?;
    let n = xs.len() as f64;
    let p = if rho.abs() >= 1.0 {
        0.0
    } else {
        let t = rho * ((n - 2.0) / (1.0 - rho * rho)).sqrt();
        t_two_tailed_p(t, n - 2.0)
    };
    Ok(TestResult { statistic: rho, p_value: p, effect_size: None })
}

/// Absolute rank difference between the official and fake rankings.
pub fn rank_delta(rank_official: u32, rank_fake: u32) -> u32 {
    rank_official.abs_diff(rank_fake)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_var(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Pooled-variance Student t-test with Cohen's d as effect size.
pub fn two_sample_t(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InsufficientData("t-test needs at least 2 samples per group".into()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let pooled_var = ((na - 1.0) * sample_var(a) + (nb - 1.0) * sample_var(b)) / (na + nb - 2.0);
    if pooled_var <= 0.0 {
        return Err(Error::DegenerateSample("zero pooled variance".into()));
    }
    let pooled_sd = pooled_var.sqrt();
    let t = (ma - mb) / (pooled_sd * (1.0 / na + 1.0 / nb).sqrt());
    let d = (ma - mb) / pooled_sd;
    let p = t_two_tailed_p(t, na + nb - 2.0);
    Ok(TestResult { statistic: t, p_value: p, effect_size: Some(d) })
}

const WILCOXON_EXACT_LIMIT: usize = 20;

fn rank_sum_statistic(a: &[f64], b: &[f64]) -> (f64, Vec<f64>) {
    let all: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = average_ranks(&all);
    let w: f64 = ranks[..a.len()].iter().sum();
    (w, ranks)
}

/// Exact two-sided p by enumerating all rank assignments of size |a|.
fn wilcoxon_exact_p(ranks: &[f64], na: usize, observed_w: f64, mu: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn count(
        ranks: &[f64],
        start: usize,
        remaining: usize,
        sum: f64,
        threshold: f64,
        mu: f64,
        hits: &mut u64,
        total: &mut u64,
    ) {
        if remaining == 0 {
            *total += 1;
            if (sum - mu).abs() >= threshold - 1e-12 {
                *hits += 1;
            }
            return;
        }
        if ranks.len() - start < remaining {
            return;
        }
        count(ranks, start + 1, remaining - 1, sum + ranks[start], threshold, mu, hits, total);
        count(ranks, start + 1, remaining, sum, threshold, mu, hits, total);
    }
    let mut hits = 0;
    let mut total = 0;
    let threshold = (observed_w - mu).abs();
    count(ranks, 0, na, 0.0, threshold, mu, &mut hits, &mut total);
    hits as f64 / total as f64
}

/// Wilcoxon rank-sum test with average-rank tie handling.
///
/// Uses exact enumeration when the combined sample is small, otherwise the
/// normal approximation with continuity correction and tie-corrected
/// variance. Effect size r = z / sqrt(n).
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData("wilcoxon needs non-empty samples".into()));
    }
    let (na, nb) = (a.len(), b.len());
    let n = na + nb;
    let (w, ranks) = rank_sum_statistic(a, b);
    let mu = na as f64 * (n as f64 + 1.0) / 2.0;

    // tie correction over groups of equal values
    let mut all: Vec<f64> = a.iter().chain(b).copied().collect();
    all.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && all[j + 1] == all[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let nf = n as f64;
    let var = na as f64 * nb as f64 / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));

    let z = if var <= 0.0 {
        0.0
    } else {
        let diff = w - mu;
        let corrected = if diff > 0.5 {
            diff - 0.5
        } else if diff < -0.5 {
            diff + 0.5
        } else {
            0.0
        };
        corrected / var.sqrt()
    };
    let r = z / (nf).sqrt();

    let p = if n <= WILCOXON_EXACT_LIMIT {
        wilcoxon_exact_p(&ranks, na, w, mu)
    } else {
        let normal = Normal::new(0.0, 1.0).unwrap();
        2.0 * normal.cdf(-z.abs())
    };
    Ok(TestResult { statistic: w, p_value: p.min(1.0), effect_size: Some(r) })
}

/// Pearson chi-square test of independence on a 2x2 table, 1 df, no
/// continuity correction.
pub fn chi_square_2x2(table: [[f64; 2]; 2]) -> Result<TestResult> {
    let row = [table[0][0] + table[0][1], table[1][0] + table[1][1]];
    let col = [table[0][0] + table[1][0], table[0][1] + table[1][1]];
    let total = row[0] + row[1];
    if row.iter().chain(&col).any(|&m| m <= 0.0) {
        return Err(Error::DegenerateSample("zero marginal in 2x2 table".into()));
    }
    let mut chi2 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let expected = row[i] * col[j] / total;
            let diff = table[i][j] - expected;
            chi2 += diff * diff / expected;
        }
    }
    let dist = ChiSquared::new(1.0).unwrap();
    let p = 1.0 - dist.cdf(chi2);
    Ok(TestResult { statistic: chi2, p_value: p, effect_size: None })
}

/// Tokenization for the n-gram pipeline: punctuation stripped (intra-word
/// apostrophes kept), lowercased, whitespace-split, stopwords removed.
pub fn tokenize(text: &str) -> Vec<String> {
    let cleaned: String = text
        .chars()
        .map(|c| {
            if c == '\'' || c == '\u{2019}' {
                '\''
            } else if c.is_alphanumeric() || c.is_whitespace() {
                c
            } else {
                ' '
            }
        })
        .collect();
    cleaned
        .to_lowercase()
        .split_whitespace()
        .map(|w| w.trim_matches('\'').to_string())
        .filter(|w| !w.is_empty() && !STOPWORDS.contains(&w.as_str()))
        .collect()
}

fn ngram_counts(texts: &[&str], n: usize) -> std::collections::HashMap<String, u64> {
    let mut counts = std::collections::HashMap::new();
    for text in texts {
        let tokens = tokenize(text);
        if tokens.len() < n {
            continue;
        }
        for window in tokens.windows(n) {
            *counts.entry(window.join(" ")).or_insert(0) += 1;
        }
    }
    counts
}

/// Tokens ranked descending by count, ties broken lexicographically.
fn ranked_top(counts: &std::collections::HashMap<String, u64>, top_k: usize) -> Vec<String> {
    let mut entries: Vec<(&String, &u64)> = counts.iter().collect();
    entries.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
    entries.into_iter().take(top_k).map(|(t, _)| t.clone()).collect()
}

/// Result of comparing the most common n-grams of two corpora.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NgramComparison {
    pub common: Vec<RankDeltaRow>,
    pub only_a: Vec<String>,
    pub only_b: Vec<String>,
}

/// Compares the `top_k` most common n-grams of two review-text corpora.
///
/// `delta = rank_a - rank_b`; negative deltas mark tokens more common in
/// corpus a.
pub fn ngram_rank_delta(
    corpus_a: &[&str],
    corpus_b: &[&str],
    n: usize,
    top_k: usize,
) -> Result<NgramComparison> {
    if corpus_a.is_empty() || corpus_b.is_empty() {
        return Err(Error::InsufficientData("ngram comparison needs non-empty corpora".into()));
    }
    let top_a = ranked_top(&ngram_counts(corpus_a, n), top_k);
    let top_b = ranked_top(&ngram_counts(corpus_b, n), top_k);
    let pos_b: std::collections::HashMap<&str, usize> =
        top_b.iter().enumerate().map(|(i, t)| (t.as_str(), i + 1)).collect();

    let mut common = Vec::new();
    let mut only_a = Vec::new();
    for (i, token) in top_a.iter().enumerate() {
        if let Some(&rb) = pos_b.get(token.as_str()) {
            let ra = (i + 1) as i64;
            common.push(RankDeltaRow {
                token: token.clone(),
                rank_a: ra,
                rank_b: rb as i64,
                delta: ra - rb as i64,
            });
        } else {
            only_a.push(token.clone());
        }
    }
    let set_a: std::collections::HashSet<&str> = top_a.iter().map(String::as_str).collect();
    let only_b = top_b.iter().filter(|t| !set_a.contains(t.as_str())).cloned().collect();
    Ok(NgramComparison { common, only_a, only_b })
}
