//! Confusion matrices (rows = actual class, columns = predicted class).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
    pub accuracy: f64,
}

impl ConfusionMatrix {
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let c = counts.len();
        if c == 0 || counts.iter().any(|r| r.len() != c) {
            return Err(Error::InvalidParameter(
                "confusion matrix must be square and non-empty".into(),
            ));
        }
        let total: u64 = counts.iter().flatten().sum();
        if total == 0 {
            return Err(Error::EmptyInput("confusion matrix has no entries".into()));
        }
        let trace: u64 = (0..c).map(|i| counts[i][i]).sum();
        Ok(ConfusionMatrix {
            accuracy: trace as f64 / total as f64,
            counts,
        })
    }

    pub fn from_predictions(actual: &[usize], predicted: &[usize], class_count: usize) -> Result<Self> {
        if actual.len() != predicted.len() {
            return Err(Error::DimensionMismatch {
                expected: actual.len(),
                got: predicted.len(),
            });
        }
        if actual.is_empty() {
            return Err(Error::EmptyInput("nothing to evaluate".into()));
        }
        let mut counts = vec![vec![0u64; class_count]; class_count];
        for (&a, &p) in actual.iter().zip(predicted) {
            if a >= class_count || p >= class_count {
                return Err(Error::InvalidParameter(format!(
                    "class id out of range 0..{class_count}: actual {a}, predicted {p}"
                )));
            }
            counts[a][p] += 1;
        }
        Self::from_counts(counts)
    }

    pub fn class_count(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.class_count()).map(|i| self.counts[i][i]).sum()
    }

    /// Number of evaluated rows per actual class.
    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    /// Recall per actual class (NaN for absent classes).
    pub fn recall(&self) -> Vec<f64> {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, r)| r[i] as f64 / r.iter().sum::<u64>() as f64)
            .collect()
    }

    /// `[[a,b],[c,d]]` rendering used in CSV reports.
    pub fn to_compact_string(&self) -> String {
        let rows: Vec<String> = self
            .counts
            .iter()
            .map(|r| {
                let cells: Vec<String> = r.iter().map(u64::to_string).collect();
                format!("[{}]", cells.join(","))
            })
            .collect();
        format!("[{}]", rows.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictor_is_diagonal() {
        let labels = [0, 1, 2, 2, 1];
        let cm = ConfusionMatrix::from_predictions(&labels, &labels, 3).unwrap();
        assert_eq!(cm.accuracy, 1.0);
        assert_eq!(cm.counts[2][2], 2);
        assert_eq!(cm.counts[0][1], 0);
    }

    #[test]
    fn constant_predictor_on_balanced_classes() {
        let actual = [0, 1, 2, 0, 1, 2];
        let cm = ConfusionMatrix::from_predictions(&actual, &[0; 6], 3).unwrap();
        assert_eq!(cm.accuracy, 1.0 / 3.0);
        assert_eq!(cm.row_sums(), vec![2, 2, 2]);
    }

    #[test]
    fn orientation_is_actual_by_predicted() {
        let cm = ConfusionMatrix::from_predictions(&[0, 0], &[1, 1], 2).unwrap();
        assert_eq!(cm.counts, vec![vec![0, 2], vec![0, 0]]);
        assert_eq!(cm.to_compact_string(), "[[0,2],[0,0]]");
    }

    #[test]
    fn out_of_range_class() {
        assert!(ConfusionMatrix::from_predictions(&[0, 3], &[0, 0], 3).is_err());
    }
}
