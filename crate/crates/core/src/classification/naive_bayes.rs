//! Gaussian naive Bayes, scored in log space.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::class_count_of;
use crate::error::{Error, Result};
use crate::preprocess::FeatureMatrix;
use crate::stats::{argmax, log_sum_exp};

/// Variance smoothing relative to the largest feature variance.
pub const VAR_SMOOTHING: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNbModel {
    pub class_count: usize,
    pub n_features: usize,
    pub priors: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    /// Per-class population variances plus `epsilon`.
    pub variances: Vec<Vec<f64>>,
    pub epsilon: f64,
}

/// Normal density N(x | mean, var).
pub fn gaussian_density(x: f64, mean: f64, var: f64) -> f64 {
    (-(x - mean).powi(2) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

pub fn gnb_fit(train: &FeatureMatrix, labels: &[usize]) -> Result<GaussianNbModel> {
    let n = train.n_rows();
    let d = train.n_cols();
    if labels.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: labels.len(),
        });
    }
    let c = class_count_of(labels);
    let mut counts = vec![0usize; c];
    for &l in labels {
        counts[l] += 1;
    }
    if let Some(class) = counts.iter().position(|&k| k < 2) {
        return Err(Error::InsufficientData(format!(
            "class {class} has {} training rows, need at least 2",
            counts[class]
        )));
    }
    let mut means = vec![vec![0.0; d]; c];
    for (row, &l) in train.rows().zip(labels) {
        for (m, v) in means[l].iter_mut().zip(row) {
            *m += v;
        }
    }
    for (m, &k) in means.iter_mut().zip(&counts) {
        for v in m.iter_mut() {
            *v /= k as f64;
        }
    }
    let mut variances = vec![vec![0.0; d]; c];
    for (row, &l) in train.rows().zip(labels) {
        for ((s, v), m) in variances[l].iter_mut().zip(row).zip(&means[l]) {
            *s += (v - m) * (v - m);
        }
    }
    let max_var = (0..d)
        .map(|j| crate::stats::variance(&train.column(j), 0))
        .fold(0.0, f64::max);
    let epsilon = VAR_SMOOTHING * max_var;
    for (vars, &k) in variances.iter_mut().zip(&counts) {
        for v in vars.iter_mut() {
            *v = *v / k as f64 + epsilon;
        }
    }
    if variances.iter().flatten().any(|&v| v <= 0.0) {
        return Err(Error::InsufficientData(
            "zero variance with every feature constant".into(),
        ));
    }
    Ok(GaussianNbModel {
        class_count: c,
        n_features: d,
        priors: counts.iter().map(|&k| k as f64 / n as f64).collect(),
        means,
        variances,
        epsilon,
    })
}

impl GaussianNbModel {
    /// ln P(C_k) + Σ_i ln N(x_i | μ_ki, σ²_ki) per class.
    pub fn joint_log_likelihood(&self, query: &[f64]) -> Result<Vec<f64>> {
        if query.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: query.len(),
            });
        }
        Ok((0..self.class_count)
            .map(|k| {
                let mut s = self.priors[k].ln();
                for ((x, m), v) in query.iter().zip(&self.means[k]).zip(&self.variances[k]) {
                    s -= 0.5 * (2.0 * PI * v).ln() + (x - m) * (x - m) / (2.0 * v);
                }
                s
            })
            .collect())
    }

    /// Log posterior per class, normalized by log-sum-exp.
    pub fn predict_log_proba(&self, query: &[f64]) -> Result<Vec<f64>> {
        let jll = self.joint_log_likelihood(query)?;
        let norm = log_sum_exp(&jll);
        Ok(jll.into_iter().map(|v| v - norm).collect())
    }

    pub fn predict(&self, query: &[f64]) -> Result<usize> {
        Ok(argmax(&self.joint_log_likelihood(query)?))
    }
}
