//! Lloyd's K-means with k-means++ seeding and best-of-n restarts.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::FeatureMatrix;
use crate::seeding::stream_rng;
use crate::stats::sq_dist;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansParams {
    pub k: usize,
    pub seed: u64,
    pub n_init: usize,
    pub max_iter: usize,
    /// Stop once the relative inertia change drops below this.
    pub tol: f64,
}

impl KMeansParams {
    pub fn new(k: usize) -> Self {
        KMeansParams {
            k,
            seed: 0,
            n_init: 10,
            max_iter: 300,
            tol: 1e-4,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_n_init(mut self, n_init: usize) -> Self {
        self.n_init = n_init;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansModel {
    pub k: usize,
    pub centroids: Vec<Vec<f64>>,
    /// Within-cluster sum of squares of the returned assignments.
    pub inertia: f64,
    #[serde(skip)]
    pub assignments: Vec<usize>,
    pub iterations_run: usize,
    pub seed: u64,
    /// Inertia after each assignment step of the winning run.
    pub inertia_trace: Vec<f64>,
}

impl KMeansModel {
    pub fn n_features(&self) -> usize {
        self.centroids.first().map_or(0, Vec::len)
    }

    /// Nearest centroid by squared Euclidean distance, lowest index on ties.
    pub fn assign(&self, point: &[f64]) -> Result<usize> {
        if point.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                got: point.len(),
            });
        }
        Ok(nearest(point, &self.centroids).0)
    }

    pub fn predict(&self, matrix: &FeatureMatrix) -> Result<Vec<usize>> {
        if matrix.n_cols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                got: matrix.n_cols(),
            });
        }
        Ok(assign_all(matrix, &self.centroids)
            .into_iter()
            .map(|(c, _)| c)
            .collect())
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }
}

/// Free-function form of [`KMeansModel::assign`].
pub fn assign(point: &[f64], model: &KMeansModel) -> Result<usize> {
    model.assign(point)
}

#[inline]
fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn assign_all(matrix: &FeatureMatrix, centroids: &[Vec<f64>]) -> Vec<(usize, f64)> {
    let d = matrix.n_cols();
    matrix
        .values()
        .par_chunks(d)
        .with_min_len(1024)
        .map(|row| nearest(row, centroids))
        .collect()
}

/// Sum of squared distances from each row to the centroid of its cluster.
pub fn wcss(matrix: &FeatureMatrix, assignments: &[usize], centroids: &[Vec<f64>]) -> Result<f64> {
    if assignments.len() != matrix.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: matrix.n_rows(),
            got: assignments.len(),
        });
    }
    for c in centroids {
        if c.len() != matrix.n_cols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.n_cols(),
                got: c.len(),
            });
        }
    }
    let mut total = 0.0;
    for (row, &a) in matrix.rows().zip(assignments) {
        let c = centroids.get(a).ok_or_else(|| {
            Error::InvalidParameter(format!("assignment {a} has no centroid"))
        })?;
        total += sq_dist(row, c);
    }
    Ok(total)
}

fn validate(matrix: &FeatureMatrix, params: &KMeansParams) -> Result<()> {
    if params.k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if params.k > matrix.n_rows() {
        return Err(Error::InvalidParameter(format!(
            "k = {} exceeds the {} available rows",
            params.k,
            matrix.n_rows()
        )));
    }
    if params.n_init == 0 || params.max_iter == 0 {
        return Err(Error::InvalidParameter(
            "n_init and max_iter must be positive".into(),
        ));
    }
    matrix.ensure_finite("k-means input")
}

/// Best of `n_init` seeded runs by final inertia (earliest run on ties).
pub fn kmeans_fit(matrix: &FeatureMatrix, params: &KMeansParams) -> Result<KMeansModel> {
    kmeans_fit_with_inits(matrix, params, &[])
}

/// As [`kmeans_fit`], with extra explicit starting centroids competing
/// against the k-means++ runs. Explicit starts run after the seeded ones.
pub fn kmeans_fit_with_inits(
    matrix: &FeatureMatrix,
    params: &KMeansParams,
    extra_inits: &[Vec<Vec<f64>>],
) -> Result<KMeansModel> {
    validate(matrix, params)?;
    let mut best: Option<Run> = None;
    let seeded = (0..params.n_init).map(|run| {
        let mut rng = stream_rng(params.seed, run as u64);
        plus_plus_init(matrix, params.k, &mut rng)
    });
    let explicit = extra_inits.iter().cloned();
    for init in seeded.chain(explicit) {
        if init.len() != params.k {
            return Err(Error::InvalidParameter(format!(
                "initial centroid set has {} centroids, expected {}",
                init.len(),
                params.k
            )));
        }
        let run = lloyd(matrix, init, params.max_iter, params.tol);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one run");
    Ok(KMeansModel {
        k: params.k,
        centroids: best.centroids,
        inertia: best.inertia,
        assignments: best.assignments,
        iterations_run: best.iterations,
        seed: params.seed,
        inertia_trace: best.trace,
    })
}

/// k-means++: first centre uniform, later ones drawn with probability
/// proportional to the squared distance to the nearest chosen centre.
fn plus_plus_init<R: Rng>(matrix: &FeatureMatrix, k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = matrix.n_rows();
    let first = rng.random_range(0..n);
    let mut centroids = vec![matrix.row(first).to_vec()];
    let mut closest: Vec<f64> = matrix
        .rows()
        .map(|r| sq_dist(r, &centroids[0]))
        .collect();
    while centroids.len() < k {
        let total: f64 = closest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, d) in closest.iter().enumerate() {
                acc += d;
                if acc > target && *d > 0.0 {
                    pick = i;
                    break;
                }
            }
            // Guard against rounding leaving the pick on a zero-weight row.
            if closest[pick] == 0.0 {
                pick = crate::stats::argmax(&closest);
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        let c = matrix.row(pick).to_vec();
        for (slot, row) in closest.iter_mut().zip(matrix.rows()) {
            let d = sq_dist(row, &c);
            if d < *slot {
                *slot = d;
            }
        }
        centroids.push(c);
    }
    centroids
}

struct Run {
    centroids: Vec<Vec<f64>>,
    assignments: Vec<usize>,
    inertia: f64,
    iterations: usize,
    trace: Vec<f64>,
}

fn lloyd(matrix: &FeatureMatrix, mut centroids: Vec<Vec<f64>>, max_iter: usize, tol: f64) -> Run {
    let k = centroids.len();
    let d = matrix.n_cols();
    let mut trace: Vec<f64> = Vec::new();
    let mut iterations = 0;
    loop {
        let nearest = assign_all(matrix, &centroids);
        let inertia: f64 = nearest.iter().map(|(_, dist)| dist).sum();
        let assignments: Vec<usize> = nearest.iter().map(|(c, _)| *c).collect();
        iterations += 1;
        if let Some(&prev) = trace.last() {
            debug_assert!(
                inertia <= prev * (1.0 + 1e-12) + 1e-12,
                "inertia increased from {prev} to {inertia}"
            );
        }
        let converged = match trace.last() {
            Some(&prev) => inertia == 0.0 || (prev - inertia).abs() <= tol * prev,
            None => inertia == 0.0,
        };
        trace.push(inertia);
        if converged || iterations >= max_iter {
            return Run {
                centroids,
                assignments,
                inertia,
                iterations,
                trace,
            };
        }

        // Centroid update, accumulated in row order.
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (row, &c) in matrix.rows().zip(&assignments) {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(row) {
                *s += v;
            }
        }
        for j in 0..k {
            if counts[j] > 0 {
                for (cv, s) in centroids[j].iter_mut().zip(&sums[j]) {
                    *cv = s / counts[j] as f64;
                }
            }
        }

        // Empty clusters seize the point farthest from its own centroid.
        let mut labels = assignments;
        for j in 0..k {
            if counts[j] > 0 {
                continue;
            }
            let mut far = None::<(usize, f64)>;
            for (i, (row, &c)) in matrix.rows().zip(&labels).enumerate() {
                if counts[c] < 2 {
                    continue;
                }
                let dist = sq_dist(row, &centroids[c]);
                if far.is_none_or(|(_, best)| dist > best) {
                    far = Some((i, dist));
                }
            }
            if let Some((i, _)) = far {
                counts[labels[i]] -= 1;
                labels[i] = j;
                counts[j] = 1;
                centroids[j] = matrix.row(i).to_vec();
            }
        }
    }
}
