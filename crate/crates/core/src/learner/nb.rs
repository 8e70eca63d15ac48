//! Gaussian naive Bayes.

use serde::{Deserialize, Serialize};

use super::FeatureMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbModel {
    log_prior_fake: f64,
    log_prior_regular: f64,
    mean_fake: Vec<f64>,
    var_fake: Vec<f64>,
    mean_regular: Vec<f64>,
    var_regular: Vec<f64>,
}

fn class_moments(x: &FeatureMatrix, indices: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let d = x.n_cols();
    let n = indices.len() as f64;
    let mut mean = vec![0.0; d];
    for &i in indices {
        for (m, v) in mean.iter_mut().zip(x.row(i)) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n;
    }
    let mut var = vec![0.0; d];
    for &i in indices {
        for ((s, v), m) in var.iter_mut().zip(x.row(i)).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    for s in var.iter_mut() {
        *s /= n;
    }
    (mean, var)
}

/// Trains per-class priors and per-feature Gaussian moments. Variances are
/// floored at 1e-9 times the largest overall feature variance.
pub fn train_gnb(x: &FeatureMatrix, y: &[bool]) -> Result<NbModel> {
    assert_eq!(x.n_rows(), y.len());
    let fake_idx: Vec<usize> = (0..y.len()).filter(|&i| y[i]).collect();
    let regular_idx: Vec<usize> = (0..y.len()).filter(|&i| !y[i]).collect();
    if fake_idx.is_empty() || regular_idx.is_empty() {
        return Err(Error::DegenerateSample("naive Bayes needs both classes".into()));
    }
    let all: Vec<usize> = (0..y.len()).collect();
    let (_, total_var) = class_moments(x, &all);
    let floor = 1e-9 * total_var.iter().cloned().fold(0.0_f64, f64::max).max(f64::MIN_POSITIVE);

    let (mean_fake, mut var_fake) = class_moments(x, &fake_idx);
    let (mean_regular, mut var_regular) = class_moments(x, &regular_idx);
    for v in var_fake.iter_mut().chain(var_regular.iter_mut()) {
        if *v < floor {
            *v = floor;
        }
    }
    let n = y.len() as f64;
    Ok(NbModel {
        log_prior_fake: (fake_idx.len() as f64 / n).ln(),
        log_prior_regular: (regular_idx.len() as f64 / n).ln(),
        mean_fake,
        var_fake,
        mean_regular,
        var_regular,
    })
}

fn log_likelihood(row: &[f64], mean: &[f64], var: &[f64]) -> f64 {
    let mut ll = 0.0;
    for ((x, m), v) in row.iter().zip(mean).zip(var) {
        ll += -0.5 * ((2.0 * std::f64::consts::PI * v).ln() + (x - m) * (x - m) / v);
    }
    ll
}

impl NbModel {
    pub fn n_features(&self) -> usize {
        self.mean_fake.len()
    }

    /// Posterior probability of the fake class per row.
    pub fn predict_score(&self, x: &FeatureMatrix) -> Vec<f64> {
        (0..x.n_rows())
            .map(|i| {
                let row = x.row(i);
                let lf = self.log_prior_fake + log_likelihood(row, &self.mean_fake, &self.var_fake);
                let lr = self.log_prior_regular
                    + log_likelihood(row, &self.mean_regular, &self.var_regular);
                let m = lf.max(lr);
                let (ef, er) = ((lf - m).exp(), (lr - m).exp());
                ef / (ef + er)
            })
            .collect()
    }

    pub fn log_posteriors(&self, row: &[f64]) -> (f64, f64) {
        (
            self.log_prior_fake + log_likelihood(row, &self.mean_fake, &self.var_fake),
            self.log_prior_regular + log_likelihood(row, &self.mean_regular, &self.var_regular),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn symmetric_data() -> (FeatureMatrix, Vec<bool>) {
        // two classes centered at +-1 on one feature, equal spread
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for offset in [-0.5, 0.0, 0.5] {
            rows.push(vec![1.0 + offset]);
            y.push(true);
            rows.push(vec![-1.0 + offset]);
            y.push(false);
        }
        (FeatureMatrix::from_rows(rows).unwrap(), y)
    }

    #[test]
    fn midpoint_is_uncertain() {
        let (x, y) = symmetric_data();
        let model = train_gnb(&x, &y).unwrap();
        let scores =
            model.predict_score(&FeatureMatrix::from_rows(vec![vec![0.0]]).unwrap());
        assert_abs_diff_eq!(scores[0], 0.5, epsilon = 1e-9);
    }

    #[test]
    fn class_mean_dominates() {
        let (x, y) = symmetric_data();
        let model = train_gnb(&x, &y).unwrap();
        let scores =
            model.predict_score(&FeatureMatrix::from_rows(vec![vec![5.0]]).unwrap());
        assert!(scores[0] > 0.99, "got {}", scores[0]);
    }

    #[test]
    fn single_class_errors() {
        let x = FeatureMatrix::from_rows(vec![vec![1.0], vec![2.0]]).unwrap();
        assert!(train_gnb(&x, &[true, true]).is_err());
    }

    #[test]
    fn log_posteriors_match_density_oracle() {
        let rows = vec![
            vec![1.0, 2.0],
            vec![2.0, 1.0],
            vec![0.5, 3.0],
            vec![-1.0, 0.0],
            vec![-2.0, 1.0],
            vec![-0.5, -1.0],
        ];
        let y = vec![true, true, true, false, false, false];
        let x = FeatureMatrix::from_rows(rows.clone()).unwrap();
        let model = train_gnb(&x, &y).unwrap();

        // hand Gaussian-density computation, independent of the model path
        let hand = |idx: &[usize], col: usize| {
            let vals: Vec<f64> = idx.iter().map(|&i| rows[i][col]).collect();
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            let v = vals.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / vals.len() as f64;
            (m, v)
        };
        let probe = [0.3, 0.7];
        let mut expected_fake = (3.0f64 / 6.0).ln();
        for (col, p) in probe.iter().enumerate() {
            let (m, v) = hand(&[0, 1, 2], col);
            expected_fake +=
                -0.5 * ((2.0 * std::f64::consts::PI * v).ln() + (p - m).powi(2) / v);
        }
        let (lf, _) = model.log_posteriors(&probe);
        assert_abs_diff_eq!(lf, expected_fake, epsilon = 1e-9);
    }

    #[test]
    fn constant_feature_does_not_blow_up() {
        let rows = vec![vec![1.0, 5.0], vec![2.0, 5.0], vec![-1.0, 5.0], vec![-2.0, 5.0]];
        let x = FeatureMatrix::from_rows(rows).unwrap();
        let model = train_gnb(&x, &[true, true, false, false]).unwrap();
        let scores =
            model.predict_score(&FeatureMatrix::from_rows(vec![vec![1.5, 5.0]]).unwrap());
        assert!(scores[0].is_finite());
        assert!(scores[0] > 0.5);
    }
}
