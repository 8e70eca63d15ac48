//! End-to-end runs of the binary: every subcommand chained over real files,
//! manifests written, exit codes honored.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_revkit")
}

fn run(args: &[&str]) {
    let out = Command::new(bin()).args(args).output().unwrap();
    assert!(
        out.status.success(),
        "revkit {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn manifest_of(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap().to_os_string();
    name.push(".manifest.json");
    path.with_file_name(name)
}

#[test]
fn full_pipeline_over_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name);
    let s = |name: &str| p(name).display().to_string();

    run(&["syngen", "--fake-reviewers", "40", "--regular-reviewers", "400", "--apps", "60",
          "--seed", "5", "--out", &s("corpus.jsonl")]);
    assert!(p("corpus.params.json").exists(), "syngen parameter sidecar missing");

    run(&["ingest", "--input", &s("corpus.jsonl"), "--strict", "--out", &s("summary.json")]);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p("summary.json")).unwrap()).unwrap();
    assert!(summary["reviews"].as_u64().unwrap() > 500);
    assert_eq!(summary["skipped"].as_u64().unwrap(), 0);

    run(&["featurize", "--input", &s("corpus.jsonl"), "--out", &s("features.csv")]);
    let features = std::fs::read_to_string(p("features.csv")).unwrap();
    let header = features.lines().next().unwrap();
    assert_eq!(
        header,
        "reviewer_total,reviewer_star_frac_1,reviewer_star_frac_2,reviewer_star_frac_3,\
         reviewer_star_frac_4,reviewer_star_frac_5,reviewer_frequency_s,account_usage_s,\
         app_total,app_star_frac_1,app_star_frac_2,app_star_frac_3,app_star_frac_4,\
         app_star_frac_5,review_length_chars,label"
    );
    assert_eq!(
        features.lines().count() as u64 - 1,
        summary["reviews"].as_u64().unwrap(),
        "one feature row per review"
    );

    run(&["train", "--features", &s("features.csv"), "--algo", "rf", "--trees", "10",
          "--max-depth", "10", "--seed", "1", "--out", &s("model.json")]);
    run(&["evaluate", "--features", &s("features.csv"), "--model", &s("model.json"),
          "--seed", "1", "--out", &s("holdout.json")]);
    let holdout: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p("holdout.json")).unwrap()).unwrap();
    assert!(holdout["metrics"]["auc"].as_f64().unwrap() > 0.9);

    run(&["evaluate", "--features", &s("features.csv"), "--algo", "gnb", "--folds", "5",
          "--repeats", "2", "--seed", "2", "--out", &s("cv.json")]);
    let cv: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p("cv.json")).unwrap()).unwrap();
    assert_eq!(cv["folds_evaluated"].as_u64().unwrap(), 10);

    run(&["importance", "--features", &s("features.csv"), "--algo", "rf", "--trees", "10",
          "--seed", "1", "--out", &s("importance.csv")]);
    let importance = std::fs::read_to_string(p("importance.csv")).unwrap();
    assert_eq!(importance.lines().count(), 16, "header plus one row per feature");
    let total: f64 = importance
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-9, "importances sum to 1, got {total}");

    run(&["tune", "--features", &s("features.csv"), "--method", "rfecv", "--algo", "dt",
          "--max-depth", "8", "--folds", "3", "--repeats", "1", "--seed", "4",
          "--out", &s("rfecv.json")]);
    let rfecv: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p("rfecv.json")).unwrap()).unwrap();
    assert!(!rfecv["selected"].as_array().unwrap().is_empty());

    run(&["stats", "--input", &s("corpus.jsonl"), "--out", &s("stats.json"),
          "--words-csv", &s("words.csv")]);
    let stats: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p("stats.json")).unwrap()).unwrap();
    assert!(stats["reviews_per_reviewer_t"]["p_value"].as_f64().unwrap() < 0.05);
    assert!(std::fs::read_to_string(p("words.csv")).unwrap().starts_with("token,"));

    // candidates straight out of the corpus must match exactly
    let corpus = std::fs::read_to_string(p("corpus.jsonl")).unwrap();
    let mut candidates = String::new();
    for (i, line) in corpus.lines().take(5).enumerate() {
        let r: serde_json::Value = serde_json::from_str(line).unwrap();
        candidates.push_str(&format!(
            "{}\n",
            serde_json::json!({"id": format!("c{i}"), "title": r["title"], "body": r["body"]})
        ));
    }
    std::fs::write(p("candidates.jsonl"), candidates).unwrap();
    run(&["match", "--candidates", &s("candidates.jsonl"), "--corpus", &s("corpus.jsonl"),
          "--out", &s("matches.csv")]);
    let matches = std::fs::read_to_string(p("matches.csv")).unwrap();
    for line in matches.lines().skip(1) {
        let method = line.split(',').nth(3).unwrap();
        // duplicates generated from the tiny vocabulary are dropped before
        // matching, so exact hits or dedup-induced misses are both valid
        assert!(method == "exact" || method == "none", "unexpected row {line}");
    }

    // every artifact got a manifest recording the run
    for artifact in ["corpus.jsonl", "features.csv", "model.json", "cv.json", "sweep.csv"] {
        if !p(artifact).exists() {
            continue;
        }
        let manifest_path = manifest_of(&p(artifact));
        assert!(manifest_path.exists(), "missing manifest for {artifact}");
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
        assert_eq!(manifest["tool"], "revkit");
        assert!(manifest["wall_time_ms"].is_number());
    }
}

#[test]
fn sweep_subcommand_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name);
    let s = |name: &str| p(name).display().to_string();

    run(&["syngen", "--fake-reviewers", "8", "--regular-reviewers", "1200", "--apps", "60",
          "--seed", "6", "--out", &s("corpus.jsonl")]);
    run(&["featurize", "--input", &s("corpus.jsonl"), "--out", &s("features.csv")]);
    run(&["sweep", "--features", &s("features.csv"), "--n-fake", "60", "--min-skew", "10",
          "--algos", "rf,gnb", "--trees", "8", "--folds", "4", "--repeats", "1",
          "--seed", "7", "--out", &s("sweep.csv")]);

    let sweep = std::fs::read_to_string(p("sweep.csv")).unwrap();
    let mut lines = sweep.lines();
    assert_eq!(
        lines.next().unwrap(),
        "skew,algorithm,precision,recall,f1,auc,n_fake,n_regular"
    );
    // 9 skews from 90 down to 10, two algorithms each
    assert_eq!(lines.count(), 18);
}

#[test]
fn missing_input_exits_2_and_bad_data_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(bin())
        .args(["ingest", "--input", &dir.path().join("nope.jsonl").display().to_string(),
               "--out", &dir.path().join("x.json").display().to_string()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "{not json}\n").unwrap();
    let out = Command::new(bin())
        .args(["ingest", "--input", &bad.display().to_string(), "--strict",
               "--out", &dir.path().join("y.json").display().to_string()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let s = |name: &str| dir.path().join(name).display().to_string();

    for (corpus, features) in [("c1.jsonl", "f1.csv"), ("c2.jsonl", "f2.csv")] {
        run(&["syngen", "--fake-reviewers", "20", "--regular-reviewers", "150",
              "--apps", "40", "--seed", "9", "--out", &s(corpus)]);
        run(&["featurize", "--input", &s(corpus), "--out", &s(features)]);
    }
    assert_eq!(
        std::fs::read(dir.path().join("c1.jsonl")).unwrap(),
        std::fs::read(dir.path().join("c2.jsonl")).unwrap()
    );
    assert_eq!(
        std::fs::read(dir.path().join("f1.csv")).unwrap(),
        std::fs::read(dir.path().join("f2.csv")).unwrap()
    );
}
