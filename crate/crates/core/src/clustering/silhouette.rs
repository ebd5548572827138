//! Silhouette coefficient, optionally on a seeded sample of rows.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::preprocess::FeatureMatrix;
use crate::seeding::stream_rng;
use crate::stats::dist;

pub const DEFAULT_SAMPLE_CAP: usize = 10_000;

/// Rows scored by [`silhouette_score`]: all of them when `n <= sample_cap`,
/// otherwise a seeded uniform sample of `sample_cap` rows (sorted).
pub fn silhouette_sample_rows(n_rows: usize, sample_cap: usize, seed: u64) -> Vec<usize> {
    if n_rows <= sample_cap {
        return (0..n_rows).collect();
    }
    let mut rng = stream_rng(seed, 0);
    let mut rows = rand::seq::index::sample(&mut rng, n_rows, sample_cap).into_vec();
    rows.sort_unstable();
    rows
}

/// Mean silhouette `(b - a) / max(a, b)` over the scored rows, each scored
/// against the full dataset. Rows alone in their cluster score 0.
pub fn silhouette_score(
    matrix: &FeatureMatrix,
    assignments: &[usize],
    sample_cap: usize,
    seed: u64,
) -> Result<f64> {
    let rows = silhouette_sample_rows(matrix.n_rows(), sample_cap.max(1), seed);
    let scores = silhouette_samples(matrix, assignments, &rows)?;
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Per-row silhouette values for `rows`.
pub fn silhouette_samples(
    matrix: &FeatureMatrix,
    assignments: &[usize],
    rows: &[usize],
) -> Result<Vec<f64>> {
    let n = matrix.n_rows();
    if assignments.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: assignments.len(),
        });
    }
    if n < 3 {
        return Err(Error::InsufficientData(format!(
            "silhouette needs at least 3 rows, got {n}"
        )));
    }
    let n_labels = assignments.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; n_labels];
    for &a in assignments {
        sizes[a] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(Error::UndefinedScore(
            "silhouette needs at least two non-empty clusters".into(),
        ));
    }
    Ok(rows
        .par_iter()
        .with_min_len(16)
        .map(|&i| {
            let own = assignments[i];
            if sizes[own] < 2 {
                return 0.0;
            }
            let point = matrix.row(i);
            let mut sums = vec![0.0; n_labels];
            for (row, &c) in matrix.rows().zip(assignments) {
                sums[c] += dist(point, row);
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = sums
                .iter()
                .zip(&sizes)
                .enumerate()
                .filter(|&(c, (_, &size))| c != own && size > 0)
                .map(|(_, (s, &size))| s / size as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom > 0.0 {
                (b - a) / denom
            } else {
                0.0
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_d(points: &[f64]) -> FeatureMatrix {
        FeatureMatrix::new(points.to_vec(), points.len(), vec!["x".into()]).unwrap()
    }

    #[test]
    fn two_pairs() {
        let m = one_d(&[0.0, 1.0, 10.0, 11.0]);
        let s = silhouette_score(&m, &[0, 0, 1, 1], 100, 0).unwrap();
        // Hand evaluation: (9.5/10.5 + 8.5/9.5) / 2.
        let expected = (9.5 / 10.5 + 8.5 / 9.5) / 2.0;
        assert!((s - expected).abs() < 1e-12);
        assert!((s - 0.8997).abs() < 1e-3);
    }

    #[test]
    fn identical_points_in_different_clusters_score_non_positive() {
        let m = one_d(&[0.0, 0.0, 1.0, 1.0]);
        let samples = silhouette_samples(&m, &[0, 1, 0, 1], &[0, 1]).unwrap();
        assert!(samples.iter().all(|&s| s <= 0.0));
    }

    #[test]
    fn singleton_scores_zero() {
        let m = one_d(&[0.0, 5.0, 6.0]);
        let samples = silhouette_samples(&m, &[0, 1, 1], &[0]).unwrap();
        assert_eq!(samples, vec![0.0]);
    }

    #[test]
    fn single_cluster_is_undefined() {
        let m = one_d(&[0.0, 1.0, 2.0]);
        assert!(matches!(
            silhouette_score(&m, &[0, 0, 0], 10, 0),
            Err(Error::UndefinedScore(_))
        ));
    }

    #[test]
    fn sampling_is_seeded() {
        let a = silhouette_sample_rows(1000, 50, 9);
        assert_eq!(a.len(), 50);
        assert_eq!(a, silhouette_sample_rows(1000, 50, 9));
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(silhouette_sample_rows(10, 50, 9), (0..10).collect::<Vec<_>>());
    }
}
