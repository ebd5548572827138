//! Supervised models that predict regime labels, plus evaluation.

pub mod forest;
pub mod knn;
pub mod metrics;
pub mod naive_bayes;
pub mod reference;
pub mod tree;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::FeatureMatrix;

pub use forest::{rf_fit, ForestParams, MaxFeatures, RandomForest};
pub use knn::{knn_fit, KnnModel};
pub use metrics::ConfusionMatrix;
pub use naive_bayes::{gaussian_density, gnb_fit, GaussianNbModel};
pub use reference::{reference_checks, ReferenceCheck, ReferenceResult, REFERENCE_RESULTS};
pub use tree::{dtree_fit, gini, weighted_gini, DecisionTree, TreeNode, TreeParams};

/// Number of classes implied by a label vector: `max + 1`, or 0 when empty.
pub fn class_count_of(labels: &[usize]) -> usize {
    labels.iter().max().map_or(0, |&m| m + 1)
}

/// Any fitted classifier behind one prediction contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum ClassifierModel {
    Knn(KnnModel),
    GaussianNb(GaussianNbModel),
    DecisionTree(DecisionTree),
    RandomForest(RandomForest),
}

impl ClassifierModel {
    pub fn name(&self) -> &'static str {
        match self {
            ClassifierModel::Knn(_) => "knn",
            ClassifierModel::GaussianNb(_) => "gaussian_nb",
            ClassifierModel::DecisionTree(_) => "decision_tree",
            ClassifierModel::RandomForest(_) => "random_forest",
        }
    }

    pub fn class_count(&self) -> usize {
        match self {
            ClassifierModel::Knn(m) => m.class_count,
            ClassifierModel::GaussianNb(m) => m.class_count,
            ClassifierModel::DecisionTree(m) => m.class_count,
            ClassifierModel::RandomForest(m) => m.class_count,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            ClassifierModel::Knn(m) => m.n_features,
            ClassifierModel::GaussianNb(m) => m.n_features,
            ClassifierModel::DecisionTree(m) => m.n_features,
            ClassifierModel::RandomForest(m) => m.n_features,
        }
    }

    pub fn predict(&self, query: &[f64]) -> Result<usize> {
        match self {
            ClassifierModel::Knn(m) => m.predict(query),
            ClassifierModel::GaussianNb(m) => m.predict(query),
            ClassifierModel::DecisionTree(m) => m.predict(query),
            ClassifierModel::RandomForest(m) => m.predict(query),
        }
    }

    /// Predicts every row, in row order.
    pub fn predict_matrix(&self, matrix: &FeatureMatrix) -> Result<Vec<usize>> {
        if matrix.n_cols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                got: matrix.n_cols(),
            });
        }
        (0..matrix.n_rows())
            .into_par_iter()
            .map(|i| self.predict(matrix.row(i)))
            .collect()
    }
}

impl From<KnnModel> for ClassifierModel {
    fn from(m: KnnModel) -> Self {
        ClassifierModel::Knn(m)
    }
}

impl From<GaussianNbModel> for ClassifierModel {
    fn from(m: GaussianNbModel) -> Self {
        ClassifierModel::GaussianNb(m)
    }
}

impl From<DecisionTree> for ClassifierModel {
    fn from(m: DecisionTree) -> Self {
        ClassifierModel::DecisionTree(m)
    }
}

impl From<RandomForest> for ClassifierModel {
    fn from(m: RandomForest) -> Self {
        ClassifierModel::RandomForest(m)
    }
}

/// Confusion matrix of `model` on a labelled test set.
pub fn evaluate(model: &ClassifierModel, test: &FeatureMatrix, labels: &[usize]) -> Result<ConfusionMatrix> {
    if test.n_rows() == 0 {
        return Err(Error::EmptyInput("empty test set".into()));
    }
    if labels.len() != test.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: test.n_rows(),
            got: labels.len(),
        });
    }
    let class_count = model.class_count().max(class_count_of(labels));
    let predicted = model.predict_matrix(test)?;
    ConfusionMatrix::from_predictions(labels, &predicted, class_count)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_constant_predictors() {
        let m = FeatureMatrix::from_rows(&[vec![0.0], vec![1.0], vec![10.0], vec![11.0], vec![20.0], vec![21.0]]).unwrap();
        let labels = [0, 0, 1, 1, 2, 2];
        let tree: ClassifierModel = dtree_fit(&m, &labels, &TreeParams::default()).unwrap().into();
        let cm = evaluate(&tree, &m, &labels).unwrap();
        assert_eq!(cm.accuracy, 1.0);
        assert_eq!(cm.counts, vec![vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 2]]);

        let stump: ClassifierModel = knn_fit(&m, &labels, 6).unwrap().into();
        let cm = evaluate(&stump, &m, &labels).unwrap();
        assert_eq!(cm.accuracy, 1.0 / 3.0);
        assert_eq!(cm.row_sums(), vec![2, 2, 2]);
    }

    #[test]
    fn tagged_serialization() {
        let m = FeatureMatrix::from_rows(&[vec![0.0], vec![1.0], vec![5.0], vec![6.0]]).unwrap();
        let model: ClassifierModel = gnb_fit(&m, &[0, 0, 1, 1]).unwrap().into();
        let json = serde_json::to_string(&model).unwrap();
        assert!(json.contains("\"variant\":\"gaussian_nb\""));
        let back: ClassifierModel = serde_json::from_str(&json).unwrap();
        assert_eq!(model, back);
    }

    #[test]
    fn dimension_check() {
        let m = FeatureMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let model: ClassifierModel = knn_fit(&m, &[0, 1], 1).unwrap().into();
        let other = FeatureMatrix::from_rows(&[vec![0.0]]).unwrap();
        assert!(evaluate(&model, &other, &[0]).is_err());
    }
}
