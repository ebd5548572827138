//! Inertia-versus-k sweep and knee detection.

use serde::{Deserialize, Serialize};

use super::kmeans::{kmeans_fit_with_inits, KMeansModel, KMeansParams};
use crate::error::{Error, Result};
use crate::preprocess::FeatureMatrix;
use crate::stats::sq_dist;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElbowPoint {
    pub k: usize,
    pub inertia: f64,
}

/// Fits K-means for every k in `k_min..=k_max`.
///
/// Besides the seeded k-means++ restarts, each k > k_min also starts from the
/// previous solution plus its worst-fitted point, so inertia can never rise
/// with k.
pub fn elbow_sweep(
    matrix: &FeatureMatrix,
    k_min: usize,
    k_max: usize,
    base: &KMeansParams,
) -> Result<Vec<ElbowPoint>> {
    Ok(elbow_sweep_models(matrix, k_min, k_max, base)?
        .into_iter()
        .map(|m| ElbowPoint {
            k: m.k,
            inertia: m.inertia,
        })
        .collect())
}

/// [`elbow_sweep`], keeping the fitted models.
pub fn elbow_sweep_models(
    matrix: &FeatureMatrix,
    k_min: usize,
    k_max: usize,
    base: &KMeansParams,
) -> Result<Vec<KMeansModel>> {
    if k_min == 0 || k_min > k_max {
        return Err(Error::InvalidParameter(format!(
            "invalid k range {k_min}..={k_max}"
        )));
    }
    if k_max > matrix.n_rows() {
        return Err(Error::InvalidParameter(format!(
            "k_max = {k_max} exceeds the {} available rows",
            matrix.n_rows()
        )));
    }
    let mut models: Vec<KMeansModel> = Vec::with_capacity(k_max - k_min + 1);
    for k in k_min..=k_max {
        let params = KMeansParams { k, ..*base };
        let extra = match models.last() {
            Some(prev) => vec![grow_by_worst_point(matrix, prev)],
            None => Vec::new(),
        };
        models.push(kmeans_fit_with_inits(matrix, &params, &extra)?);
    }
    Ok(models)
}

fn grow_by_worst_point(matrix: &FeatureMatrix, model: &KMeansModel) -> Vec<Vec<f64>> {
    let mut worst = (0, f64::NEG_INFINITY);
    for (i, (row, &c)) in matrix.rows().zip(&model.assignments).enumerate() {
        let d = sq_dist(row, &model.centroids[c]);
        if d > worst.1 {
            worst = (i, d);
        }
    }
    let mut centroids = model.centroids.clone();
    centroids.push(matrix.row(worst.0).to_vec());
    centroids
}

/// The k with the largest discrete second difference of inertia; smallest k
/// on ties. Pairs must have consecutive k.
pub fn detect_elbow(points: &[ElbowPoint]) -> Result<usize> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "elbow detection needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points.windows(2).any(|w| w[1].k != w[0].k + 1) {
        return Err(Error::InvalidParameter(
            "elbow points must have consecutive k".into(),
        ));
    }
    let mut best = (points[1].k, f64::NEG_INFINITY);
    for w in points.windows(3) {
        let curvature = w[0].inertia - 2.0 * w[1].inertia + w[2].inertia;
        if curvature > best.1 {
            best = (w[1].k, curvature);
        }
    }
    Ok(best.0)
}

/// Second differences at each interior k, for reporting.
pub fn curvatures(points: &[ElbowPoint]) -> Vec<(usize, f64)> {
    points
        .windows(3)
        .map(|w| (w[1].k, w[0].inertia - 2.0 * w[1].inertia + w[2].inertia))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(inertias: &[f64]) -> Vec<ElbowPoint> {
        inertias
            .iter()
            .enumerate()
            .map(|(i, &inertia)| ElbowPoint { k: i + 1, inertia })
            .collect()
    }

    #[test]
    fn detects_knee() {
        let p = pts(&[100.0, 50.0, 15.0, 13.0, 12.0]);
        let c: Vec<f64> = curvatures(&p).into_iter().map(|(_, c)| c).collect();
        assert_eq!(c, vec![15.0, 33.0, 1.0]);
        assert_eq!(detect_elbow(&p).unwrap(), 3);
    }

    #[test]
    fn linear_decay_picks_smallest_interior_k() {
        assert_eq!(detect_elbow(&pts(&[10.0, 8.0, 6.0, 4.0, 2.0])).unwrap(), 2);
    }

    #[test]
    fn needs_three_points() {
        assert!(detect_elbow(&pts(&[10.0, 8.0])).is_err());
    }

    #[test]
    fn sweep_on_four_points() {
        let m = FeatureMatrix::new(vec![0.0, 1.0, 9.0, 10.0], 4, vec!["x".into()]).unwrap();
        let base = KMeansParams::new(1).with_seed(5);
        let sweep = elbow_sweep(&m, 1, 4, &base).unwrap();
        let inertias: Vec<f64> = sweep.iter().map(|p| p.inertia).collect();
        assert!(inertias.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(inertias[3], 0.0);
        assert_eq!(sweep, elbow_sweep(&m, 1, 4, &base).unwrap());
    }
}
