//! CART classification tree with Gini impurity splits.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::class_count_of;
use crate::error::{Error, Result};
use crate::preprocess::FeatureMatrix;
use crate::stats::argmax_count;

/// `1 − Σ p_i²` for the class proportions in `counts`.
pub fn gini(counts: &[usize]) -> Result<f64> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyInput("gini of an empty node".into()));
    }
    let t = total as f64;
    Ok(1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>())
}

/// Child-size-weighted Gini of a binary split.
pub fn weighted_gini(left: &[usize], right: &[usize]) -> Result<f64> {
    let nl: usize = left.iter().sum();
    let nr: usize = right.iter().sum();
    let n = (nl + nr) as f64;
    let part = |counts: &[usize], size: usize| -> Result<f64> {
        if size == 0 {
            Ok(0.0)
        } else {
            Ok(size as f64 / n * gini(counts)?)
        }
    };
    Ok(part(left, nl)? + part(right, nr)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf { class: usize, counts: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<TreeNode>,
    pub n_features: usize,
    pub class_count: usize,
    pub params: TreeParams,
}

impl DecisionTree {
    pub fn predict(&self, query: &[f64]) -> Result<usize> {
        if query.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: query.len(),
            });
        }
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if query[*feature] <= *threshold { *left } else { *right },
                TreeNode::Leaf { class, .. } => return Ok(*class),
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], at: usize) -> usize {
            match &nodes[at] {
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                TreeNode::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }
}

pub fn dtree_fit(train: &FeatureMatrix, labels: &[usize], params: &TreeParams) -> Result<DecisionTree> {
    check_training_set(train, labels)?;
    let rows: Vec<usize> = (0..train.n_rows()).collect();
    let class_count = class_count_of(labels);
    Ok(grow(
        train,
        labels,
        rows,
        class_count,
        params,
        None::<(usize, &mut rand_chacha::ChaCha8Rng)>,
    ))
}

pub(crate) fn check_training_set(train: &FeatureMatrix, labels: &[usize]) -> Result<()> {
    if train.n_rows() == 0 {
        return Err(Error::EmptyInput("empty training set".into()));
    }
    if labels.len() != train.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: train.n_rows(),
            got: labels.len(),
        });
    }
    train.ensure_finite("training matrix")
}

/// A candidate split scored by `Σ_c left_c²/n_left + Σ_c right_c²/n_right`,
/// held as an exact fraction so that equal-quality splits compare equal.
#[derive(Clone, Copy)]
struct Candidate {
    feature: usize,
    threshold: f64,
    numer: u128,
    denom: u128,
}

impl Candidate {
    fn beats(&self, other: &Option<Candidate>) -> bool {
        match other {
            None => true,
            Some(o) => self.numer * o.denom > o.numer * self.denom,
        }
    }
}

/// Grows a tree over `rows` (duplicates allowed, for bootstrap samples).
/// With `sampler = Some((m, rng))` each node first considers `m` random
/// features, then falls through the remaining ones until a valid split
/// appears.
pub(crate) fn grow<R: Rng>(
    train: &FeatureMatrix,
    labels: &[usize],
    rows: Vec<usize>,
    class_count: usize,
    params: &TreeParams,
    mut sampler: Option<(usize, &mut R)>,
) -> DecisionTree {
    let d = train.n_cols();
    let mut nodes: Vec<TreeNode> = vec![TreeNode::Leaf {
        class: 0,
        counts: Vec::new(),
    }];
    let mut stack: Vec<(usize, Vec<usize>, usize)> = vec![(0, rows, 0)];
    let mut scratch: Vec<(f64, usize)> = Vec::new();

    while let Some((id, node_rows, depth)) = stack.pop() {
        let mut counts = vec![0usize; class_count];
        for &r in &node_rows {
            counts[labels[r]] += 1;
        }
        let n = node_rows.len();
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_capped = params.max_depth.is_some_and(|m| depth >= m);
        let too_small = n < params.min_samples_split.max(2) || n < 2 * params.min_samples_leaf.max(1);

        let best = if pure || depth_capped || too_small {
            None
        } else {
            let order: Vec<usize> = match sampler.as_mut() {
                Some((m, rng)) if *m < d => {
                    let mut all: Vec<usize> = (0..d).collect();
                    all.shuffle(*rng);
                    let (head, _) = all.split_at_mut(*m);
                    head.sort_unstable();
                    all
                }
                _ => (0..d).collect(),
            };
            let budget = sampler.as_ref().map_or(d, |(m, _)| (*m).min(d));
            let mut best: Option<Candidate> = None;
            for (pos, &f) in order.iter().enumerate() {
                if pos >= budget && best.is_some() {
                    break;
                }
                if let Some(c) = best_split_on(train, labels, &node_rows, f, class_count, params, &counts, &mut scratch) {
                    if c.beats(&best) {
                        best = Some(c);
                    }
                }
            }
            best
        };

        match best {
            Some(c) => {
                let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = node_rows
                    .iter()
                    .partition(|&&r| train.row(r)[c.feature] <= c.threshold);
                let left = nodes.len();
                let right = left + 1;
                nodes.push(TreeNode::Leaf { class: 0, counts: Vec::new() });
                nodes.push(TreeNode::Leaf { class: 0, counts: Vec::new() });
                nodes[id] = TreeNode::Split {
                    feature: c.feature,
                    threshold: c.threshold,
                    left,
                    right,
                };
                // Right first so the left subtree is expanded first.
                stack.push((right, right_rows, depth + 1));
                stack.push((left, left_rows, depth + 1));
            }
            None => {
                nodes[id] = TreeNode::Leaf {
                    class: argmax_count(&counts),
                    counts,
                };
            }
        }
    }
    DecisionTree {
        nodes,
        n_features: d,
        class_count,
        params: *params,
    }
}

/// Best threshold on one feature: midpoints of consecutive distinct values,
/// lowest threshold among equal scores.
#[allow(clippy::too_many_arguments)]
fn best_split_on(
    train: &FeatureMatrix,
    labels: &[usize],
    rows: &[usize],
    feature: usize,
    class_count: usize,
    params: &TreeParams,
    totals: &[usize],
    scratch: &mut Vec<(f64, usize)>,
) -> Option<Candidate> {
    scratch.clear();
    scratch.extend(rows.iter().map(|&r| (train.row(r)[feature], labels[r])));
    scratch.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let n = scratch.len();
    let min_leaf = params.min_samples_leaf.max(1);

    let mut left = vec![0u64; class_count];
    let mut right: Vec<u64> = totals.iter().map(|&c| c as u64).collect();
    let mut left_sq: u64 = 0;
    let mut right_sq: u64 = right.iter().map(|c| c * c).sum();
    let mut best: Option<Candidate> = None;
    for i in 0..n - 1 {
        let class = scratch[i].1;
        left_sq += 2 * left[class] + 1;
        left[class] += 1;
        right_sq -= 2 * right[class] - 1;
        right[class] -= 1;
        let (v, next) = (scratch[i].0, scratch[i + 1].0);
        if v == next {
            continue;
        }
        let nl = (i + 1) as u128;
        let nr = (n - i - 1) as u128;
        if (nl as usize) < min_leaf || (nr as usize) < min_leaf {
            continue;
        }
        let mut threshold = v + (next - v) / 2.0;
        if threshold >= next {
            threshold = v;
        }
        let cand = Candidate {
            feature,
            threshold,
            numer: u128::from(left_sq) * nr + u128::from(right_sq) * nl,
            denom: nl * nr,
        };
        if cand.beats(&best) {
            best = Some(cand);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gini_examples() {
        assert_eq!(gini(&[10, 10]).unwrap(), 0.5);
        assert_eq!(gini(&[20, 0]).unwrap(), 0.0);
        assert!((gini(&[1, 1, 1]).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!(gini(&[0, 0]).is_err());
    }

    #[test]
    fn xor_is_learned_at_depth_two() {
        let m = FeatureMatrix::from_rows(&[
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ])
        .unwrap();
        let labels = [0, 1, 1, 0];
        let tree = dtree_fit(&m, &labels, &TreeParams { max_depth: Some(2), ..Default::default() }).unwrap();
        for (i, &l) in labels.iter().enumerate() {
            assert_eq!(tree.predict(m.row(i)).unwrap(), l);
        }
        // Every root split ties at weighted Gini 0.5: lowest feature wins.
        match &tree.nodes[0] {
            TreeNode::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 0.5);
            }
            _ => panic!("root should split"),
        }
    }

    #[test]
    fn single_class_is_a_leaf() {
        let m = FeatureMatrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let tree = dtree_fit(&m, &[2, 2, 2], &TreeParams::default()).unwrap();
        assert_eq!(tree.nodes.len(), 1);
        assert_eq!(tree.depth(), 0);
        assert_eq!(tree.predict(&[10.0]).unwrap(), 2);
    }

    #[test]
    fn root_split_on_hand_case() {
        // x: 1 2 3 4 5 6, labels A A A B A B.
        // Thresholds 1.5..5.5 give weighted Gini:
        //   1.5: 5/6·(1 − (3/5)² − (2/5)²) = 0.4
        //   2.5: 4/6·0.5 = 0.3333
        //   3.5: 3/6·(1 − 1/9 − 4/9) = 0.2222
        //   4.5: 4/6·(1 − 9/16 − 1/16) + 2/6·0.5 = 0.4167
        //   5.5: 5/6·(1 − 16/25 − 1/25) = 0.2667
        let m = FeatureMatrix::from_rows(&(1..=6).map(|v| vec![v as f64]).collect::<Vec<_>>()).unwrap();
        let labels = [0, 0, 0, 1, 0, 1];
        assert!((weighted_gini(&[3, 0], &[1, 2]).unwrap() - 2.0 / 9.0).abs() < 1e-12);
        let tree = dtree_fit(&m, &labels, &TreeParams { max_depth: Some(1), ..Default::default() }).unwrap();
        match &tree.nodes[0] {
            TreeNode::Split { threshold, .. } => assert_eq!(*threshold, 3.5),
            _ => panic!("root should split"),
        }
    }

    #[test]
    fn leaf_size_floor_is_respected() {
        let m = FeatureMatrix::from_rows(&(1..=6).map(|v| vec![v as f64]).collect::<Vec<_>>()).unwrap();
        let labels = [0, 1, 1, 1, 1, 1];
        let tree = dtree_fit(
            &m,
            &labels,
            &TreeParams { min_samples_leaf: 2, ..Default::default() },
        )
        .unwrap();
        for node in &tree.nodes {
            if let TreeNode::Leaf { counts, .. } = node {
                assert!(counts.iter().sum::<usize>() >= 2);
            }
        }
    }

    #[test]
    fn empty_training_set() {
        let m = FeatureMatrix::new(vec![], 0, vec!["x".into()]).unwrap();
        assert!(dtree_fit(&m, &[], &TreeParams::default()).is_err());
    }
}
