//! Bagged ensemble of randomized CART trees.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::class_count_of;
use super::tree::{check_training_set, grow, DecisionTree, TreeParams};
use crate::error::{Error, Result};
use crate::preprocess::FeatureMatrix;
use crate::seeding::stream_rng;
use crate::stats::argmax_count;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    /// `⌈√d⌉` candidate features per node.
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => ((d as f64).sqrt().ceil() as usize).clamp(1, d.max(1)),
            MaxFeatures::All => d,
            MaxFeatures::Count(m) => m.clamp(1, d.max(1)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub seed: u64,
    pub tree: TreeParams,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
            seed: 0,
            tree: TreeParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
    pub n_features: usize,
    pub class_count: usize,
    pub params: ForestParams,
}

impl RandomForest {
    /// Majority vote; ties go to the smallest class id.
    pub fn predict(&self, query: &[f64]) -> Result<usize> {
        let mut votes = vec![0usize; self.class_count];
        for tree in &self.trees {
            votes[tree.predict(query)?] += 1;
        }
        Ok(argmax_count(&votes))
    }
}

/// Tree `t` draws from its own random stream, so the fit is identical for
/// any thread count.
pub fn rf_fit(train: &FeatureMatrix, labels: &[usize], params: &ForestParams) -> Result<RandomForest> {
    check_training_set(train, labels)?;
    if params.n_trees == 0 {
        return Err(Error::InvalidParameter("forest needs at least one tree".into()));
    }
    let n = train.n_rows();
    let d = train.n_cols();
    let class_count = class_count_of(labels);
    let m = params.max_features.resolve(d);
    let trees: Vec<DecisionTree> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(params.seed, t as u64);
            let rows: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            grow(train, labels, rows, class_count, &params.tree, Some((m, &mut rng)))
        })
        .collect();
    Ok(RandomForest {
        trees,
        n_features: d,
        class_count,
        params: *params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> (FeatureMatrix, Vec<usize>) {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..60 {
            let c = i % 3;
            let jitter = (i as f64 * 0.37).sin() * 0.3;
            rows.push(vec![c as f64 * 3.0 + jitter, -(c as f64) + jitter * 0.5, jitter]);
            labels.push(c);
        }
        (FeatureMatrix::from_rows(&rows).unwrap(), labels)
    }

    #[test]
    fn sqrt_rule() {
        assert_eq!(MaxFeatures::Sqrt.resolve(11), 4);
        assert_eq!(MaxFeatures::Sqrt.resolve(15), 4);
        assert_eq!(MaxFeatures::Sqrt.resolve(16), 4);
        assert_eq!(MaxFeatures::Sqrt.resolve(1), 1);
        assert_eq!(MaxFeatures::Count(40).resolve(5), 5);
    }

    #[test]
    fn separable_blobs_are_fit_exactly() {
        let (m, labels) = blobs();
        let forest = rf_fit(&m, &labels, &ForestParams { n_trees: 15, seed: 3, ..Default::default() }).unwrap();
        for (i, &l) in labels.iter().enumerate() {
            assert_eq!(forest.predict(m.row(i)).unwrap(), l);
        }
    }

    #[test]
    fn fit_is_seed_deterministic() {
        let (m, labels) = blobs();
        let p = ForestParams { n_trees: 8, seed: 11, ..Default::default() };
        let a = rf_fit(&m, &labels, &p).unwrap();
        let b = rf_fit(&m, &labels, &p).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| rf_fit(&m, &labels, &p).unwrap());
        assert_eq!(a, c);
    }

    #[test]
    fn zero_trees_rejected() {
        let (m, labels) = blobs();
        assert!(rf_fit(&m, &labels, &ForestParams { n_trees: 0, ..Default::default() }).is_err());
    }
}
