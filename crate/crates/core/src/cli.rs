//! Command-line entry point wiring all pipeline stages into reproducible,
//! scriptable runs. Every invocation flows from one root seed and writes a
//! JSON run-manifest next to its primary output.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::charstats::{self, TestResult};
use crate::corpus::{self, Label, ReviewCorpus};
use crate::error::{Error, Result};
use crate::featurizer::{self, FEATURE_DIM, FEATURE_NAMES};
use crate::learner::{
    auc_roc, cross_validate, default_grid, evaluate, grid_search, rfecv, CVConfig, Criterion,
    FeatureMatrix, ForestParams, MaxFeatures, Model, ModelSpec, PreprocessScope, TreeParams,
    VersionedModel,
};
use crate::matcher;
use crate::sweeper;
use crate::syngen::{self, PopulationParams};

const SECONDS_PER_DAY: f64 = 86_400.0;

#[derive(Debug, Parser)]
#[command(name = "revkit", version, about = "App store review mining toolkit")]
pub struct Cli {
    /// Worker threads for parallel stages (default: machine parallelism,
    /// or the REVKIT_WORKERS environment variable).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load and validate a review corpus, reporting counts.
    Ingest(IngestArgs),
    /// Match candidate texts against a corpus by exact and fuzzy comparison.
    Match(MatchArgs),
    /// Statistical comparison of the fake and regular partitions.
    Stats(StatsArgs),
    /// Extract the 15-column feature CSV from a corpus.
    Featurize(FeaturizeArgs),
    /// Train a classifier on a feature CSV and save the model.
    Train(TrainArgs),
    /// Evaluate a saved model or cross-validate an algorithm.
    Evaluate(EvaluateArgs),
    /// Feature selection (rfecv) or hyperparameter grid search.
    Tune(TuneArgs),
    /// Split-count feature importances of a tree or forest.
    Importance(ImportanceArgs),
    /// Class-imbalance sweep over nested skewed datasets.
    Sweep(SweepArgs),
    /// Generate a labeled synthetic corpus.
    Syngen(SyngenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgoArg {
    Rf,
    Dt,
    Gnb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScopeArg {
    Fold,
    Global,
}

impl From<ScopeArg> for PreprocessScope {
    fn from(s: ScopeArg) -> Self {
        match s {
            ScopeArg::Fold => PreprocessScope::Fold,
            ScopeArg::Global => PreprocessScope::Global,
        }
    }
}

/// Model hyperparameters shared by train/evaluate/tune/importance/sweep.
#[derive(Debug, Args, Clone)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "rf")]
    algo: AlgoArg,
    /// Trees in the forest.
    #[arg(long, default_value_t = 100)]
    trees: usize,
    /// Maximum tree depth; omit for unbounded.
    #[arg(long)]
    max_depth: Option<u32>,
    /// Features considered per split: "all", "sqrt", or a count.
    #[arg(long, default_value = "sqrt")]
    max_features: String,
    #[arg(long, default_value_t = 2)]
    min_samples_split: usize,
}

impl ModelArgs {
    fn max_features(&self) -> Result<MaxFeatures> {
        match self.max_features.as_str() {
            "all" => Ok(MaxFeatures::All),
            "sqrt" => Ok(MaxFeatures::Sqrt),
            other => other
                .parse::<usize>()
                .map(MaxFeatures::Count)
                .map_err(|_| Error::InvalidParameter(format!("bad --max-features `{other}`"))),
        }
    }

    fn to_spec(&self, seed: u64) -> Result<ModelSpec> {
        let tree = TreeParams {
            criterion: Criterion::Gini,
            max_depth: self.max_depth,
            max_features: self.max_features()?,
            min_samples_split: self.min_samples_split,
            seed,
        };
        Ok(match self.algo {
            AlgoArg::Gnb => ModelSpec::Gnb,
            AlgoArg::Dt => ModelSpec::Tree(tree),
            AlgoArg::Rf => ModelSpec::Forest(ForestParams {
                n_estimators: self.trees,
                tree,
                bootstrap: true,
                seed,
            }),
        })
    }
}

#[derive(Debug, Args, Clone)]
struct CvArgs {
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 30)]
    repeats: usize,
    #[arg(long, value_enum, default_value = "fold")]
    preprocess_scope: ScopeArg,
}

impl CvArgs {
    fn config(&self, seed: u64) -> CVConfig {
        CVConfig { folds: self.folds, repeats: self.repeats, seed }
    }
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    #[arg(long)]
    strict: bool,
    #[arg(long, value_name = "FILE")]
    app_meta: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct MatchArgs {
    #[arg(long, value_name = "FILE")]
    candidates: PathBuf,
    #[arg(long, value_name = "FILE")]
    corpus: PathBuf,
    /// Maximum edit distance for a fuzzy match.
    #[arg(long, default_value_t = matcher::DEFAULT_DISTANCE_CAP)]
    max_dist: usize,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct StatsArgs {
    /// Labeled corpus (fake/regular labels required).
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    #[arg(long, value_name = "FILE")]
    app_meta: Option<PathBuf>,
    /// JSON report output.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Optional CSV of word rank deltas.
    #[arg(long, value_name = "FILE")]
    words_csv: Option<PathBuf>,
    /// Optional CSV of bi-gram rank deltas.
    #[arg(long, value_name = "FILE")]
    bigrams_csv: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    top_k: usize,
}

#[derive(Debug, Args)]
struct FeaturizeArgs {
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Null-fill value for missing review frequency, seconds.
    #[arg(long, default_value_t = featurizer::DEFAULT_STORE_LIFETIME_S)]
    store_lifetime_s: f64,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long, value_name = "FILE")]
    features: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long, value_name = "FILE")]
    features: PathBuf,
    /// Saved model; when omitted, runs cross-validation with --algo.
    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,
    #[command(flatten)]
    model_args: ModelArgs,
    #[command(flatten)]
    cv: CvArgs,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TuneMethod {
    Grid,
    Rfecv,
}

#[derive(Debug, Args)]
struct TuneArgs {
    #[arg(long, value_name = "FILE")]
    features: PathBuf,
    #[arg(long, value_enum)]
    method: TuneMethod,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    cv: CvArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ImportanceArgs {
    #[arg(long, value_name = "FILE")]
    features: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Labeled feature CSV supplying the fake set and regular pool.
    #[arg(long, value_name = "FILE")]
    features: PathBuf,
    /// Fixed fake-set size (first rows of the fake partition).
    #[arg(long, default_value_t = 800)]
    n_fake: usize,
    /// Smallest skew percentage to evaluate.
    #[arg(long, default_value_t = 1.0)]
    min_skew: f64,
    /// Comma-separated algorithms: rf, dt, gnb.
    #[arg(long, default_value = "rf")]
    algos: String,
    #[arg(long, default_value_t = 25)]
    trees: usize,
    #[arg(long)]
    max_depth: Option<u32>,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long, value_enum, default_value = "fold")]
    preprocess_scope: ScopeArg,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SyngenArgs {
    #[arg(long, default_value_t = 270)]
    fake_reviewers: usize,
    #[arg(long, default_value_t = 3200)]
    regular_reviewers: usize,
    #[arg(long, default_value_t = 400)]
    apps: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Corpus output (newline-delimited JSON); a parameter sidecar is
    /// written next to it.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Serialize)]
struct Manifest {
    tool: String,
    version: String,
    subcommand: String,
    args: String,
    seed: Option<u64>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    wall_time_ms: u128,
}

fn write_manifest(
    primary_out: &Path,
    subcommand: &str,
    args: &str,
    seed: Option<u64>,
    inputs: &[&Path],
    outputs: &[&Path],
    started: Instant,
) -> Result<()> {
    let manifest = Manifest {
        tool: "revkit".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: subcommand.into(),
        args: args.into(),
        seed,
        inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
        wall_time_ms: started.elapsed().as_millis(),
    };
    let path = manifest_path(primary_out);
    write_file(&path, &serde_json::to_string_pretty(&manifest).expect("manifest serializes"))
}

/// `<out>.manifest.json` next to the primary artifact.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).map_err(|source| Error::Io { path: path.into(), source })
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let generated = rand::random::<u64>();
        eprintln!("no --seed given; using generated seed {generated}");
        generated
    })
}

/// Reads a feature CSV (15 feature columns + label) back into a matrix.
pub fn read_features(path: &Path) -> Result<(FeatureMatrix, Vec<Option<Label>>)> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Error::Malformed { line: 0, message: format!("{path:?}: {e}") })?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Malformed { line: 1, message: e.to_string() })?
        .clone();
    let expected: Vec<&str> = FEATURE_NAMES.iter().copied().chain(["label"]).collect();
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(Error::Malformed {
            line: 1,
            message: format!("unexpected feature CSV header {got:?}"),
        });
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Malformed { line: i + 2, message: e.to_string() })?;
        let mut row = Vec::with_capacity(FEATURE_DIM);
        for v in record.iter().take(FEATURE_DIM) {
            row.push(v.parse::<f64>().map_err(|e| Error::Malformed {
                line: i + 2,
                message: format!("bad number `{v}`: {e}"),
            })?);
        }
        labels.push(match record.get(FEATURE_DIM).unwrap_or("") {
            "fake" => Some(Label::Fake),
            "regular" => Some(Label::Regular),
            "" => None,
            other => {
                return Err(Error::Malformed {
                    line: i + 2,
                    message: format!("unknown label `{other}`"),
                })
            }
        });
        rows.push(row);
    }
    Ok((FeatureMatrix::from_rows(rows)?, labels))
}

fn require_labels(labels: &[Option<Label>]) -> Result<Vec<bool>> {
    labels
        .iter()
        .map(|l| l.map(|l| l == Label::Fake))
        .collect::<Option<Vec<bool>>>()
        .ok_or_else(|| Error::Validation("feature file has unlabeled rows".into()))
}

fn write_features_csv(
    path: &Path,
    matrix: &FeatureMatrix,
    labels: &[Option<Label>],
) -> Result<()> {
    let mut out = String::new();
    out.push_str(&FEATURE_NAMES.join(","));
    out.push_str(",label\n");
    for (i, label) in labels.iter().enumerate() {
        let row: Vec<String> = matrix.row(i).iter().map(|v| format!("{v}")).collect();
        out.push_str(&row.join(","));
        out.push(',');
        out.push_str(match label {
            Some(Label::Fake) => "fake",
            Some(Label::Regular) => "regular",
            None => "",
        });
        out.push('\n');
    }
    write_file(path, &out)
}

fn load_corpus(path: &Path, strict: bool) -> Result<corpus::LoadReport> {
    corpus::load_reviews(path, strict)
}

// ---------------------------------------------------------------------------
// subcommand bodies

#[derive(Debug, Serialize)]
struct IngestSummary {
    reviews: usize,
    skipped: usize,
    reviewers: usize,
    apps: usize,
    labeled_fake: usize,
    labeled_regular: usize,
}

fn run_ingest(args: &IngestArgs) -> Result<Vec<PathBuf>> {
    let report = load_corpus(&args.input, args.strict)?;
    if let Some(meta_path) = &args.app_meta {
        corpus::load_app_meta(meta_path)?;
    }
    let fake = report
        .corpus
        .reviews()
        .iter()
        .filter(|r| r.label == Some(Label::Fake))
        .count();
    let regular = report
        .corpus
        .reviews()
        .iter()
        .filter(|r| r.label == Some(Label::Regular))
        .count();
    let summary = IngestSummary {
        reviews: report.corpus.len(),
        skipped: report.skipped,
        reviewers: report.corpus.reviewer_ids().count(),
        apps: report.corpus.app_ids().count(),
        labeled_fake: fake,
        labeled_regular: regular,
    };
    write_file(&args.out, &serde_json::to_string_pretty(&summary).unwrap())?;
    Ok(vec![args.out.clone()])
}

fn load_candidates(path: &Path) -> Result<Vec<matcher::Candidate>> {
    let file = fs::File::open(path).map_err(|source| Error::Io { path: path.into(), source })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| Error::Io { path: path.into(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::Malformed { line: i + 1, message: e.to_string() })?,
        );
    }
    Ok(out)
}

fn run_match(args: &MatchArgs) -> Result<Vec<PathBuf>> {
    let corpus = load_corpus(&args.corpus, true)?.corpus;
    let (deduped, removed) = matcher::dedup(&corpus)?;
    eprintln!("dedup removed {removed} reviews; matching against {}", deduped.len());
    let candidates = load_candidates(&args.candidates)?;
    let results = matcher::match_reviews(&candidates, &deduped, args.max_dist);
    let mut out = String::from("candidate_id,matched_review_id,distance,method\n");
    for r in &results {
        let method = match r.method {
            matcher::MatchMethod::Exact => "exact",
            matcher::MatchMethod::Fuzzy => "fuzzy",
            matcher::MatchMethod::Ambiguous => "ambiguous",
            matcher::MatchMethod::None => "none",
        };
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.candidate_id,
            r.matched_review_id.as_deref().unwrap_or(""),
            r.distance.map(|d| d.to_string()).unwrap_or_default(),
            method
        ));
    }
    write_file(&args.out, &out)?;
    Ok(vec![args.out.clone()])
}

#[derive(Debug, Serialize)]
struct StatsReport {
    n_fake_reviews: usize,
    n_regular_reviews: usize,
    rating_fractions_fake: [f64; 5],
    rating_fractions_regular: [f64; 5],
    /// t-test on reviews-per-reviewer, fake vs regular reviewers.
    reviews_per_reviewer_t: Option<TestResult>,
    /// t-test on review frequency (days), multi-review reviewers only.
    review_frequency_days_t: Option<TestResult>,
    /// t-test on account lifetime (days).
    account_lifetime_days_t: Option<TestResult>,
    /// Wilcoxon rank-sum on review length in characters.
    review_length_wilcoxon: Option<TestResult>,
    /// Chi-square on the 2x2 table of five-star vs other ratings.
    five_star_chi2: Option<TestResult>,
    /// Chi-square on the 2x2 table of reviews with vs without helpful votes.
    helpful_votes_chi2: Option<TestResult>,
    /// Spearman correlation of per-category app-count ranks (needs app
    /// metadata with categories).
    category_rank_spearman: Option<TestResult>,
    category_rank_deltas: Option<Vec<(String, u32)>>,
    common_words: usize,
    common_bigrams: usize,
}

fn partition_by_label(corpus: &ReviewCorpus) -> Result<(Vec<&corpus::Review>, Vec<&corpus::Review>)> {
    let mut fake = Vec::new();
    let mut regular = Vec::new();
    for r in corpus.reviews() {
        match r.label {
            Some(Label::Fake) => fake.push(r),
            Some(Label::Regular) => regular.push(r),
            None => {
                return Err(Error::Validation(format!(
                    "stats needs fully labeled corpus; review {} has no label",
                    r.review_id
                )))
            }
        }
    }
    if fake.is_empty() || regular.is_empty() {
        return Err(Error::InsufficientData("stats needs both labels present".into()));
    }
    Ok((fake, regular))
}

fn rating_fractions(reviews: &[&corpus::Review]) -> [f64; 5] {
    let mut counts = [0.0; 5];
    for r in reviews {
        counts[(r.rating - 1) as usize] += 1.0;
    }
    counts.map(|c| c / reviews.len() as f64)
}

fn rank_delta_csv(rows: &[charstats::RankDeltaRow]) -> String {
    let mut out = String::from("token,rank_a,rank_b,delta\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.token, r.rank_a, r.rank_b, r.delta));
    }
    out
}

fn category_analysis(
    corpus: &ReviewCorpus,
    meta: &std::collections::BTreeMap<String, corpus::AppMeta>,
) -> Option<(TestResult, Vec<(String, u32)>)> {
    use std::collections::BTreeMap;
    // apps per category in each partition (an app counts where it received
    // at least one review of that label)
    let mut fake_apps: BTreeMap<&str, std::collections::BTreeSet<&str>> = BTreeMap::new();
    let mut regular_apps: BTreeMap<&str, std::collections::BTreeSet<&str>> = BTreeMap::new();
    for r in corpus.reviews() {
        let category = meta.get(&r.app_id).and_then(|m| m.category.as_deref())?;
        match r.label {
            Some(Label::Fake) => fake_apps.entry(category).or_default().insert(&r.app_id),
            Some(Label::Regular) => regular_apps.entry(category).or_default().insert(&r.app_id),
            None => return None,
        };
    }
    let categories: Vec<&str> = fake_apps
        .keys()
        .copied()
        .filter(|c| regular_apps.contains_key(*c))
        .collect();
    if categories.len() < 3 {
        return None;
    }
    let count_rank = |m: &BTreeMap<&str, std::collections::BTreeSet<&str>>| -> Vec<f64> {
        // rank 1 = most apps; dense competition ranks via sorted counts
        let counts: Vec<i64> = categories.iter().map(|c| -(m[c].len() as i64)).collect();
        charstats::average_ranks(&counts.iter().map(|&v| v as f64).collect::<Vec<_>>())
    };
    let fake_ranks = count_rank(&fake_apps);
    let regular_ranks = count_rank(&regular_apps);
    let spearman = charstats::spearman(&fake_ranks, &regular_ranks).ok()?;
    let deltas = categories
        .iter()
        .zip(fake_ranks.iter().zip(&regular_ranks))
        .map(|(c, (f, r))| {
            (c.to_string(), charstats::rank_delta(r.round() as u32, f.round() as u32))
        })
        .collect();
    Some((spearman, deltas))
}

fn run_stats(args: &StatsArgs) -> Result<Vec<PathBuf>> {
    let corpus = load_corpus(&args.input, true)?.corpus;
    let (fake, regular) = partition_by_label(&corpus)?;
    let (reviewers, _) = corpus::build_profiles(&corpus);

    // reviewer-level samples split by the label of the reviewer's reviews
    // (synthetic and matched corpora label whole reviewers consistently;
    // mixed reviewers fall into the side of their first review)
    let mut fake_counts = Vec::new();
    let mut regular_counts = Vec::new();
    let mut fake_freq = Vec::new();
    let mut regular_freq = Vec::new();
    let mut fake_life = Vec::new();
    let mut regular_life = Vec::new();
    for profile in reviewers.values() {
        let first = corpus
            .reviews_by_reviewer(&profile.reviewer_id)
            .next()
            .and_then(|r| r.label);
        let (counts, freq, life) = match first {
            Some(Label::Fake) => (&mut fake_counts, &mut fake_freq, &mut fake_life),
            Some(Label::Regular) => (&mut regular_counts, &mut regular_freq, &mut regular_life),
            None => continue,
        };
        counts.push(profile.total_reviews as f64);
        if let Some(f) = profile.review_frequency_s {
            freq.push(f / SECONDS_PER_DAY);
        }
        life.push(profile.account_lifetime_s as f64 / SECONDS_PER_DAY);
    }

    let fake_lengths: Vec<f64> = fake.iter().map(|r| r.length_chars() as f64).collect();
    let regular_lengths: Vec<f64> = regular.iter().map(|r| r.length_chars() as f64).collect();

    let fake_texts: Vec<String> =
        fake.iter().map(|r| format!("{} {}", r.title, r.body)).collect();
    let regular_texts: Vec<String> =
        regular.iter().map(|r| format!("{} {}", r.title, r.body)).collect();
    let fake_refs: Vec<&str> = fake_texts.iter().map(String::as_str).collect();
    let regular_refs: Vec<&str> = regular_texts.iter().map(String::as_str).collect();
    let words = charstats::ngram_rank_delta(&fake_refs, &regular_refs, 1, args.top_k)?;
    let bigrams = charstats::ngram_rank_delta(&fake_refs, &regular_refs, 2, args.top_k)?;

    let category = match &args.app_meta {
        Some(path) => {
            let meta = corpus::load_app_meta(path)?;
            category_analysis(&corpus, &meta)
        }
        None => None,
    };
    let (category_rank_spearman, category_rank_deltas) = match category {
        Some((s, d)) => (Some(s), Some(d)),
        None => (None, None),
    };

    let report = StatsReport {
        n_fake_reviews: fake.len(),
        n_regular_reviews: regular.len(),
        rating_fractions_fake: rating_fractions(&fake),
        rating_fractions_regular: rating_fractions(&regular),
        reviews_per_reviewer_t: charstats::two_sample_t(&fake_counts, &regular_counts).ok(),
        review_frequency_days_t: charstats::two_sample_t(&fake_freq, &regular_freq).ok(),
        account_lifetime_days_t: charstats::two_sample_t(&fake_life, &regular_life).ok(),
        review_length_wilcoxon: charstats::wilcoxon_rank_sum(&fake_lengths, &regular_lengths)
            .ok(),
        five_star_chi2: {
            let count = |rs: &[&corpus::Review], p: fn(&corpus::Review) -> bool| {
                rs.iter().filter(|r| p(r)).count() as f64
            };
            charstats::chi_square_2x2([
                [count(&fake, |r| r.rating == 5), count(&fake, |r| r.rating != 5)],
                [count(&regular, |r| r.rating == 5), count(&regular, |r| r.rating != 5)],
            ])
            .ok()
        },
        helpful_votes_chi2: {
            let count = |rs: &[&corpus::Review], p: fn(&corpus::Review) -> bool| {
                rs.iter().filter(|r| p(r)).count() as f64
            };
            charstats::chi_square_2x2([
                [count(&fake, |r| r.helpful_votes > 0), count(&fake, |r| r.helpful_votes == 0)],
                [
                    count(&regular, |r| r.helpful_votes > 0),
                    count(&regular, |r| r.helpful_votes == 0),
                ],
            ])
            .ok()
        },
        category_rank_spearman,
        category_rank_deltas,
        common_words: words.common.len(),
        common_bigrams: bigrams.common.len(),
    };
    write_file(&args.out, &serde_json::to_string_pretty(&report).unwrap())?;
    let mut outputs = vec![args.out.clone()];
    if let Some(path) = &args.words_csv {
        write_file(path, &rank_delta_csv(&words.common))?;
        outputs.push(path.clone());
    }
    if let Some(path) = &args.bigrams_csv {
        write_file(path, &rank_delta_csv(&bigrams.common))?;
        outputs.push(path.clone());
    }
    Ok(outputs)
}

fn run_featurize(args: &FeaturizeArgs) -> Result<Vec<PathBuf>> {
    let corpus = load_corpus(&args.input, true)?.corpus;
    if corpus.is_empty() {
        return Err(Error::InsufficientData("empty corpus".into()));
    }
    let (reviewers, apps) = corpus::build_profiles(&corpus);
    let mut rows = Vec::with_capacity(corpus.len());
    let mut labels = Vec::with_capacity(corpus.len());
    for r in corpus.reviews() {
        let fv = featurizer::extract_features(
            r,
            &reviewers[&r.reviewer_id],
            &apps[&r.app_id],
            args.store_lifetime_s,
        )?;
        rows.push(fv.values);
        labels.push(fv.label);
    }
    let matrix = FeatureMatrix::from_fixed(&rows);
    write_features_csv(&args.out, &matrix, &labels)?;
    Ok(vec![args.out.clone()])
}

fn run_train(args: &TrainArgs, seed: u64) -> Result<Vec<PathBuf>> {
    let (x, labels) = read_features(&args.features)?;
    let y = require_labels(&labels)?;
    let spec = args.model.to_spec(seed)?;
    let model = spec.train(&x, &y)?;
    let versioned =
        VersionedModel::new(model, FEATURE_NAMES.iter().map(|s| s.to_string()).collect());
    write_file(&args.out, &versioned.to_json())?;
    Ok(vec![args.out.clone()])
}

#[derive(Debug, Serialize)]
struct HoldoutReport {
    confusion: crate::learner::ConfusionMatrix,
    metrics: crate::learner::Metrics,
    threshold: f64,
    n: usize,
}

fn run_evaluate(args: &EvaluateArgs, seed: u64) -> Result<Vec<PathBuf>> {
    let (x, labels) = read_features(&args.features)?;
    let y = require_labels(&labels)?;
    let json = match &args.model {
        Some(model_path) => {
            let content = fs::read_to_string(model_path)
                .map_err(|source| Error::Io { path: model_path.into(), source })?;
            let versioned = VersionedModel::from_json(&content)?;
            let scores = versioned.model.predict_score(&x)?;
            let (confusion, mut metrics) = evaluate(&y, &scores, args.threshold);
            metrics.auc = auc_roc(&y, &scores).ok();
            serde_json::to_string_pretty(&HoldoutReport {
                confusion,
                metrics,
                threshold: args.threshold,
                n: y.len(),
            })
            .unwrap()
        }
        None => {
            let spec = args.model_args.to_spec(seed)?;
            let report = cross_validate(
                &x,
                &y,
                &spec,
                &args.cv.config(seed),
                args.cv.preprocess_scope.into(),
            )?;
            serde_json::to_string_pretty(&report).unwrap()
        }
    };
    write_file(&args.out, &json)?;
    Ok(vec![args.out.clone()])
}

fn run_tune(args: &TuneArgs, seed: u64) -> Result<Vec<PathBuf>> {
    let (x, labels) = read_features(&args.features)?;
    let y = require_labels(&labels)?;
    let cv = args.cv.config(seed);
    let scope = args.cv.preprocess_scope.into();
    let json = match args.method {
        TuneMethod::Grid => {
            let result = grid_search(&x, &y, &default_grid(), &cv, scope)?;
            serde_json::to_string_pretty(&result).unwrap()
        }
        TuneMethod::Rfecv => {
            let spec = args.model.to_spec(seed)?;
            let result = rfecv(&x, &y, &spec, &cv, scope)?;
            serde_json::to_string_pretty(&result).unwrap()
        }
    };
    write_file(&args.out, &json)?;
    Ok(vec![args.out.clone()])
}

fn run_importance(args: &ImportanceArgs, seed: u64) -> Result<Vec<PathBuf>> {
    let (x, labels) = read_features(&args.features)?;
    let y = require_labels(&labels)?;
    let spec = args.model.to_spec(seed)?;
    if matches!(spec, ModelSpec::Gnb) {
        return Err(Error::InvalidParameter("importance needs --algo rf or dt".into()));
    }
    let model: Model = spec.train(&x, &y)?;
    let (weights, degenerate) = model.feature_importance()?;
    let mut out = String::from("feature,importance\n");
    for (name, w) in FEATURE_NAMES.iter().zip(&weights) {
        out.push_str(&format!("{name},{w}\n"));
    }
    if degenerate {
        eprintln!("warning: model has no split nodes; importances are all zero");
    }
    write_file(&args.out, &out)?;
    Ok(vec![args.out.clone()])
}

fn run_sweep(args: &SweepArgs, seed: u64) -> Result<Vec<PathBuf>> {
    let (x, labels) = read_features(&args.features)?;
    let y = require_labels(&labels)?;
    let fake_idx: Vec<usize> = (0..y.len()).filter(|&i| y[i]).collect();
    let regular_idx: Vec<usize> = (0..y.len()).filter(|&i| !y[i]).collect();
    if fake_idx.len() < args.n_fake {
        return Err(Error::InsufficientData(format!(
            "need {} fake rows, file has {}",
            args.n_fake,
            fake_idx.len()
        )));
    }
    let fakes = x.select_rows(&fake_idx[..args.n_fake]);
    let pool = x.select_rows(&regular_idx);

    let mut algorithms = Vec::new();
    for name in args.algos.split(',') {
        let tree = TreeParams {
            criterion: Criterion::Gini,
            max_depth: args.max_depth,
            max_features: MaxFeatures::Sqrt,
            min_samples_split: 2,
            seed,
        };
        algorithms.push(match name.trim() {
            "rf" => ModelSpec::Forest(ForestParams {
                n_estimators: args.trees,
                tree,
                bootstrap: true,
                seed,
            }),
            "dt" => ModelSpec::Tree(TreeParams { max_features: MaxFeatures::All, ..tree }),
            "gnb" => ModelSpec::Gnb,
            other => return Err(Error::InvalidParameter(format!("unknown algorithm `{other}`"))),
        });
    }

    let skews: Vec<f64> =
        sweeper::skew_grid().into_iter().filter(|&s| s >= args.min_skew - 1e-9).collect();
    let cv = CVConfig { folds: args.folds, repeats: args.repeats, seed };
    let rows = sweeper::run_sweep(
        &fakes,
        &pool,
        &algorithms,
        &skews,
        &cv,
        args.preprocess_scope.into(),
        seed,
    )?;

    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
    let mut out = String::from("skew,algorithm,precision,recall,f1,auc,n_fake,n_regular\n");
    for r in &rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.skew_percent,
            r.algorithm,
            fmt(r.metrics.precision),
            fmt(r.metrics.recall),
            fmt(r.metrics.f1),
            fmt(r.metrics.auc),
            r.n_fake,
            r.n_regular
        ));
    }
    write_file(&args.out, &out)?;
    Ok(vec![args.out.clone()])
}

fn run_syngen(args: &SyngenArgs, seed: u64) -> Result<Vec<PathBuf>> {
    let fake = PopulationParams::fake_default();
    let regular = PopulationParams::regular_default();
    let corpus = syngen::generate(
        &fake,
        &regular,
        args.fake_reviewers,
        args.regular_reviewers,
        args.apps,
        seed,
    )?;
    let mut file = fs::File::create(&args.out)
        .map_err(|source| Error::Io { path: args.out.clone(), source })?;
    for r in corpus.reviews() {
        writeln!(file, "{}", serde_json::to_string(r).unwrap())
            .map_err(|source| Error::Io { path: args.out.clone(), source })?;
    }

    #[derive(Serialize)]
    struct Sidecar<'a> {
        seed: u64,
        fake_reviewers: usize,
        regular_reviewers: usize,
        apps: usize,
        fake: &'a PopulationParams,
        regular: &'a PopulationParams,
        reviews_generated: usize,
    }
    let sidecar_path = args.out.with_extension("params.json");
    write_file(
        &sidecar_path,
        &serde_json::to_string_pretty(&Sidecar {
            seed,
            fake_reviewers: args.fake_reviewers,
            regular_reviewers: args.regular_reviewers,
            apps: args.apps,
            fake: &fake,
            regular: &regular,
            reviews_generated: corpus.len(),
        })
        .unwrap(),
    )?;
    Ok(vec![args.out.clone(), sidecar_path])
}

/// Parses argv, runs the chosen stage, writes the manifest. Returns the
/// process exit code: 0 success, 2 missing input, 1 anything else.
pub fn run_main() -> i32 {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let workers = cli
        .workers
        .or_else(|| std::env::var("REVKIT_WORKERS").ok().and_then(|v| v.parse().ok()));
    if let Some(w) = workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("warning: could not configure {w} workers: {e}");
        }
    }

    let started = Instant::now();
    let result = dispatch(&cli.command, &argv, started);
    match result {
        Ok(()) => 0,
        Err(Error::Io { path, source }) if source.kind() == std::io::ErrorKind::NotFound => {
            eprintln!("error: missing input {}: {source}", path.display());
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(command: &Command, argv: &[String], started: Instant) -> Result<()> {
    let args_str = argv.join(" ");
    let (name, seed, inputs, outputs): (&str, Option<u64>, Vec<PathBuf>, Vec<PathBuf>) =
        match command {
            Command::Ingest(a) => {
                let outs = run_ingest(a)?;
                ("ingest", None, vec![a.input.clone()], outs)
            }
            Command::Match(a) => {
                let outs = run_match(a)?;
                ("match", None, vec![a.candidates.clone(), a.corpus.clone()], outs)
            }
            Command::Stats(a) => {
                let outs = run_stats(a)?;
                ("stats", None, vec![a.input.clone()], outs)
            }
            Command::Featurize(a) => {
                let outs = run_featurize(a)?;
                ("featurize", None, vec![a.input.clone()], outs)
            }
            Command::Train(a) => {
                let seed = resolve_seed(a.seed);
                let outs = run_train(a, seed)?;
                ("train", Some(seed), vec![a.features.clone()], outs)
            }
            Command::Evaluate(a) => {
                let seed = resolve_seed(a.seed);
                let mut ins = vec![a.features.clone()];
                if let Some(m) = &a.model {
                    ins.push(m.clone());
                }
                let outs = run_evaluate(a, seed)?;
                ("evaluate", Some(seed), ins, outs)
            }
            Command::Tune(a) => {
                let seed = resolve_seed(a.seed);
                let outs = run_tune(a, seed)?;
                ("tune", Some(seed), vec![a.features.clone()], outs)
            }
            Command::Importance(a) => {
                let seed = resolve_seed(a.seed);
                let outs = run_importance(a, seed)?;
                ("importance", Some(seed), vec![a.features.clone()], outs)
            }
            Command::Sweep(a) => {
                let seed = resolve_seed(a.seed);
                let outs = run_sweep(a, seed)?;
                ("sweep", Some(seed), vec![a.features.clone()], outs)
            }
            Command::Syngen(a) => {
                let seed = resolve_seed(a.seed);
                let outs = run_syngen(a, seed)?;
                ("syngen", Some(seed), vec![], outs)
            }
        };
    let primary = outputs.first().cloned().unwrap_or_else(|| PathBuf::from("run"));
    let input_refs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
    let output_refs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    write_manifest(&primary, name, &args_str, seed, &input_refs, &output_refs, started)
}
