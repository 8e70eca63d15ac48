//! The 15-dimensional feature scheme and its preprocessing pipeline:
//! null filling, per-sample unit-norm scaling, per-feature standardization.

use serde::{Deserialize, Serialize};

use crate::corpus::{AppProfile, Label, Review, ReviewerProfile};
use crate::error::{Error, Result};

/// Number of numeric feature dimensions.
pub const FEATURE_DIM: usize = 15;

/// Default null-fill for missing review frequency: 9 years of 365 days,
/// in seconds.
pub const DEFAULT_STORE_LIFETIME_S: f64 = 9.0 * 365.0 * 86_400.0;

/// Canonical feature column names, in vector order.
pub const FEATURE_NAMES: [&str; FEATURE_DIM] = [
    "reviewer_total",
    "reviewer_star_frac_1",
    "reviewer_star_frac_2",
    "reviewer_star_frac_3",
    "reviewer_star_frac_4",
    "reviewer_star_frac_5",
    "reviewer_frequency_s",
    "account_usage_s",
    "app_total",
    "app_star_frac_1",
    "app_star_frac_2",
    "app_star_frac_3",
    "app_star_frac_4",
    "app_star_frac_5",
    "review_length_chars",
];

/// One review's numeric features plus its optional label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: [f64; FEATURE_DIM],
    pub label: Option<Label>,
}

impl FeatureVector {
    pub fn reviewer_total(&self) -> f64 {
        self.values[0]
    }
    pub fn app_total(&self) -> f64 {
        self.values[8]
    }
}

/// Extracts the feature vector for one review given its reviewer and app
/// profiles. A missing review frequency is filled with `store_lifetime_s`.
pub fn extract_features(
    review: &Review,
    reviewer: &ReviewerProfile,
    app: &AppProfile,
    store_lifetime_s: f64,
) -> Result<FeatureVector> {
    if reviewer.reviewer_id != review.reviewer_id {
        return Err(Error::Validation(format!(
            "reviewer profile {} does not match review {}",
            reviewer.reviewer_id, review.review_id
        )));
    }
    if app.app_id != review.app_id {
        return Err(Error::Validation(format!(
            "app profile {} does not match review {}",
            app.app_id, review.review_id
        )));
    }
    let mut values = [0.0; FEATURE_DIM];
    values[0] = reviewer.total_reviews as f64;
    values[1..6].copy_from_slice(&reviewer.per_star_fraction);
    values[6] = reviewer.review_frequency_s.unwrap_or(store_lifetime_s);
    values[7] = reviewer.account_lifetime_s as f64;
    values[8] = app.total_reviews as f64;
    values[9..14].copy_from_slice(&app.per_star_fraction);
    values[14] = review.length_chars() as f64;
    Ok(FeatureVector { values, label: review.label })
}

/// Scales each nonzero row to unit Euclidean norm; all-zero rows pass
/// through unchanged.
pub fn normalize_rows(matrix: &mut [[f64; FEATURE_DIM]]) {
    for row in matrix.iter_mut() {
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in row.iter_mut() {
                *x /= norm;
            }
        }
    }
}

/// Fitted standardization parameters.
///
/// A constant feature is recorded with sd 0 and divided by 1 at transform
/// time, so it passes through centered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerState {
    pub mean: [f64; FEATURE_DIM],
    pub sd: [f64; FEATURE_DIM],
    pub fitted_on: u64,
}

impl ScalerState {
    /// Fits per-column mean and population standard deviation.
    pub fn fit(matrix: &[[f64; FEATURE_DIM]]) -> Result<Self> {
        if matrix.len() < 2 {
            return Err(Error::InsufficientData("scaler fit needs at least 2 rows".into()));
        }
        let n = matrix.len() as f64;
        let mut mean = [0.0; FEATURE_DIM];
        for row in matrix {
            for (m, x) in mean.iter_mut().zip(row) {
                *m += x;
            }
        }
        for m in mean.iter_mut() {
            *m /= n;
        }
        let mut sd = [0.0; FEATURE_DIM];
        for row in matrix {
            for ((s, x), m) in sd.iter_mut().zip(row).zip(&mean) {
                *s += (x - m) * (x - m);
            }
        }
        for s in sd.iter_mut() {
            *s = (*s / n).sqrt();
        }
        Ok(Self { mean, sd, fitted_on: fingerprint(matrix) })
    }

    /// Applies (x - mean) / sd column-wise in place.
    pub fn transform(&self, matrix: &mut [[f64; FEATURE_DIM]]) {
        for row in matrix.iter_mut() {
            for ((x, m), s) in row.iter_mut().zip(&self.mean).zip(&self.sd) {
                let divisor = if *s > 0.0 { *s } else { 1.0 };
                *x = (*x - m) / divisor;
            }
        }
    }
}

/// Order-sensitive fingerprint of a feature matrix (FNV over the raw bits).
fn fingerprint(matrix: &[[f64; FEATURE_DIM]]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for row in matrix {
        for x in row {
            h ^= x.to_bits();
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// Fits on `fit_matrix` and transforms `apply_matrix`.
pub fn standardize(
    fit_matrix: &[[f64; FEATURE_DIM]],
    apply_matrix: &mut [[f64; FEATURE_DIM]],
) -> Result<ScalerState> {
    let state = ScalerState::fit(fit_matrix)?;
    state.transform(apply_matrix);
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn profile_pair() -> (ReviewerProfile, AppProfile) {
        (
            ReviewerProfile {
                reviewer_id: "u1".into(),
                total_reviews: 100,
                per_star_fraction: [0.7, 0.0, 0.0, 0.0, 0.3],
                first_ts: 0,
                last_ts: 600,
                account_lifetime_s: 600,
                review_frequency_s: Some(100.0),
            },
            AppProfile {
                app_id: "a1".into(),
                total_reviews: 100,
                per_star_fraction: [0.2, 0.2, 0.2, 0.2, 0.2],
                category: None,
                price_cents: None,
            },
        )
    }

    fn review_of_length(len: usize) -> Review {
        Review {
            review_id: "r1".into(),
            app_id: "a1".into(),
            reviewer_id: "u1".into(),
            title: String::new(),
            body: "x".repeat(len),
            rating: 5,
            timestamp: 0,
            helpful_votes: 0,
            unhelpful_votes: 0,
            label: Some(Label::Fake),
        }
    }

    #[test]
    fn example_row() {
        let (reviewer, app) = profile_pair();
        let fv =
            extract_features(&review_of_length(100), &reviewer, &app, DEFAULT_STORE_LIFETIME_S)
                .unwrap();
        let expected = [
            100.0, 0.7, 0.0, 0.0, 0.0, 0.3, 100.0, 600.0, 100.0, 0.2, 0.2, 0.2, 0.2, 0.2, 100.0,
        ];
        assert_eq!(fv.values, expected);
        assert_eq!(fv.label, Some(Label::Fake));
    }

    #[test]
    fn single_review_reviewer_fills_frequency() {
        let (mut reviewer, app) = profile_pair();
        reviewer.total_reviews = 1;
        reviewer.review_frequency_s = None;
        reviewer.account_lifetime_s = 0;
        let fv =
            extract_features(&review_of_length(10), &reviewer, &app, DEFAULT_STORE_LIFETIME_S)
                .unwrap();
        assert_eq!(fv.values[6], 283_824_000.0);
        assert_eq!(fv.values[7], 0.0);
    }

    #[test]
    fn length_counts_title_and_body_chars() {
        let (reviewer, app) = profile_pair();
        let mut r = review_of_length(0);
        r.title = "Hi".into();
        r.body = "Ok!".into();
        let fv = extract_features(&r, &reviewer, &app, DEFAULT_STORE_LIFETIME_S).unwrap();
        assert_eq!(fv.values[14], 5.0);
    }

    #[test]
    fn mismatched_profile_errors() {
        let (reviewer, mut app) = profile_pair();
        app.app_id = "other".into();
        assert!(
            extract_features(&review_of_length(1), &reviewer, &app, DEFAULT_STORE_LIFETIME_S)
                .is_err()
        );
    }

    #[test]
    fn normalize_345_triangle() {
        let mut m = [[0.0; FEATURE_DIM]];
        m[0][0] = 3.0;
        m[0][1] = 4.0;
        normalize_rows(&mut m);
        assert_abs_diff_eq!(m[0][0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(m[0][1], 0.8, epsilon = 1e-15);
    }

    #[test]
    fn normalize_idempotent_and_zero_row() {
        let mut m = [[0.0; FEATURE_DIM]; 2];
        m[0][3] = 2.5;
        m[0][9] = -7.0;
        normalize_rows(&mut m);
        let once = m;
        normalize_rows(&mut m);
        assert_eq!(m, once);
        assert_eq!(m[1], [0.0; FEATURE_DIM]);
        let norm: f64 = m[0].iter().map(|x| x * x).sum::<f64>();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn standardize_closed_form() {
        let mut m = [[0.0; FEATURE_DIM]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            row[0] = (i + 1) as f64;
            row[1] = 5.0; // constant column
        }
        let fit = m;
        standardize(&fit, &mut m).unwrap();
        let expected = (1.5f64).sqrt(); // 1 / sqrt(2/3)
        assert_abs_diff_eq!(m[0][0], -expected, epsilon = 1e-12);
        assert_abs_diff_eq!(m[1][0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m[2][0], expected, epsilon = 1e-12);
        assert_eq!([m[0][1], m[1][1], m[2][1]], [0.0, 0.0, 0.0]);
    }

    #[test]
    fn standardize_moments_on_fit_set() {
        let mut m = vec![[0.0; FEATURE_DIM]; 40];
        let mut v = 0.37f64;
        for row in m.iter_mut() {
            for x in row.iter_mut() {
                v = (v * 997.0 + 0.1234).fract();
                *x = v * 20.0 - 10.0;
            }
        }
        let fit = m.clone();
        standardize(&fit, &mut m).unwrap();
        for col in 0..FEATURE_DIM {
            let mean: f64 = m.iter().map(|r| r[col]).sum::<f64>() / m.len() as f64;
            let var: f64 = m.iter().map(|r| (r[col] - mean).powi(2)).sum::<f64>() / m.len() as f64;
            assert_abs_diff_eq!(mean, 0.0, epsilon = 1e-9);
            assert_abs_diff_eq!(var.sqrt(), 1.0, epsilon = 1e-9);
        }
    }
}
