//! Brute-force k-nearest-neighbour classifier.

use serde::{Deserialize, Serialize};

use super::class_count_of;
use crate::error::{Error, Result};
use crate::preprocess::FeatureMatrix;
use crate::stats::{argmax_count, sq_dist};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k_neighbors: usize,
    pub n_features: usize,
    pub class_count: usize,
    train: Vec<f64>,
    labels: Vec<usize>,
}

pub fn knn_fit(train: &FeatureMatrix, labels: &[usize], k_neighbors: usize) -> Result<KnnModel> {
    if labels.len() != train.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: train.n_rows(),
            got: labels.len(),
        });
    }
    if k_neighbors == 0 || k_neighbors > train.n_rows() {
        return Err(Error::InvalidParameter(format!(
            "k_neighbors = {k_neighbors} must be in 1..={}",
            train.n_rows()
        )));
    }
    Ok(KnnModel {
        k_neighbors,
        n_features: train.n_cols(),
        class_count: class_count_of(labels),
        train: train.values().to_vec(),
        labels: labels.to_vec(),
    })
}

impl KnnModel {
    /// Indices of the k nearest training rows, nearest first; equal
    /// distances keep the lower row index first.
    pub fn neighbors(&self, query: &[f64]) -> Result<Vec<usize>> {
        if query.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: query.len(),
            });
        }
        let k = self.k_neighbors;
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        for (i, row) in self.train.chunks_exact(self.n_features.max(1)).enumerate() {
            let d = sq_dist(query, row);
            if best.len() == k && d >= best[k - 1].0 {
                continue;
            }
            let pos = best.partition_point(|&(bd, _)| bd <= d);
            best.insert(pos, (d, i));
            best.truncate(k);
        }
        Ok(best.into_iter().map(|(_, i)| i).collect())
    }

    /// Majority vote of the k nearest rows, smallest class id on ties.
    pub fn predict(&self, query: &[f64]) -> Result<usize> {
        let mut votes = vec![0usize; self.class_count];
        for i in self.neighbors(query)? {
            votes[self.labels[i]] += 1;
        }
        Ok(argmax_count(&votes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_d(points: &[f64]) -> FeatureMatrix {
        FeatureMatrix::new(points.to_vec(), points.len(), vec!["x".into()]).unwrap()
    }

    #[test]
    fn nearest_single_neighbour() {
        let m = knn_fit(&one_d(&[0.0, 10.0]), &[0, 1], 1).unwrap();
        assert_eq!(m.predict(&[1.0]).unwrap(), 0);
        assert_eq!(m.predict(&[9.0]).unwrap(), 1);
    }

    #[test]
    fn equidistant_vote_tie_goes_to_smallest_class() {
        let m = knn_fit(&one_d(&[0.0, 10.0]), &[1, 0], 2).unwrap();
        assert_eq!(m.predict(&[5.0]).unwrap(), 0);
    }

    #[test]
    fn distance_ties_prefer_lower_row() {
        let m = knn_fit(&one_d(&[4.0, 6.0, 6.0]), &[0, 1, 2], 1).unwrap();
        assert_eq!(m.neighbors(&[5.0]).unwrap(), vec![0]);
        let m = knn_fit(&one_d(&[6.0, 4.0]), &[1, 0], 1).unwrap();
        assert_eq!(m.predict(&[5.0]).unwrap(), 1);
    }

    #[test]
    fn k_equals_n_is_majority() {
        let m = knn_fit(&one_d(&[0.0, 1.0, 2.0, 50.0]), &[2, 2, 1, 1], 4).unwrap();
        assert_eq!(m.predict(&[49.0]).unwrap(), 1);
        let m = knn_fit(&one_d(&[0.0, 1.0, 2.0, 50.0]), &[2, 2, 2, 1], 4).unwrap();
        assert_eq!(m.predict(&[49.0]).unwrap(), 2);
    }

    #[test]
    fn out_of_range_k() {
        assert!(knn_fit(&one_d(&[0.0]), &[0], 2).is_err());
        assert!(knn_fit(&one_d(&[0.0]), &[0], 0).is_err());
    }

    #[test]
    fn serialization_round_trip() {
        let m = knn_fit(&one_d(&[0.1, 0.2 + 1e-17, 1.0 / 3.0]), &[0, 1, 0], 1).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        let back: KnnModel = serde_json::from_str(&json).unwrap();
        assert_eq!(m, back);
    }
}
