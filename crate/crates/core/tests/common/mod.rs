//! Brute-force reference implementations and seeded instance generators
//! shared by the oracle and acceptance tests. Each oracle is written
//! independently of the library code it checks.

#![allow(dead_code)]

use drought_regimes::classification::{gini, gnb_fit, knn_fit};
use drought_regimes::clustering::{silhouette_score, wcss, KMeansModel};
use drought_regimes::density::profile_clusters;
use drought_regimes::ingest::WEATHER_PARAMETERS;
use drought_regimes::synth::{generate, Preset, SynthSpec};
use drought_regimes::FeatureMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const INSTANCES: usize = 100;
pub const REL_TOL: f64 = 1e-9;

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x0AC1E ^ seed.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Random rows; every other instance draws from a small integer lattice so
/// that exact distance ties occur.
pub fn random_rows(r: &mut ChaCha8Rng, n: usize, d: usize, lattice: bool) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            (0..d)
                .map(|_| {
                    if lattice {
                        r.random_range(-2i32..=2) as f64
                    } else {
                        r.random_range(-5.0..5.0)
                    }
                })
                .collect()
        })
        .collect()
}

/// Labels in `0..k` with every class present.
pub fn random_labels(r: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut l: Vec<usize> = (0..n).map(|i| if i < k { i } else { r.random_range(0..k) }).collect();
    // Shuffle so the guaranteed members are not always the first rows.
    for i in (1..n).rev() {
        let j = r.random_range(0..=i);
        l.swap(i, j);
    }
    l
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    s.sqrt()
}

/// Outcome of one oracle family: instances run and worst relative error.
#[derive(Debug, Clone)]
pub struct OracleOutcome {
    pub name: &'static str,
    pub instances: usize,
    pub max_rel_err: f64,
    pub mismatches: usize,
}

impl OracleOutcome {
    pub fn ok(&self) -> bool {
        self.instances >= INSTANCES && self.mismatches == 0 && self.max_rel_err <= REL_TOL
    }
}

fn outcome(name: &'static str) -> OracleOutcome {
    OracleOutcome {
        name,
        instances: 0,
        max_rel_err: 0.0,
        mismatches: 0,
    }
}

pub fn oracle_assign() -> OracleOutcome {
    let mut out = outcome("assign");
    for s in 0..INSTANCES as u64 {
        let mut r = rng(s);
        let d = r.random_range(1..6);
        let k = r.random_range(1..8);
        let lattice = s % 2 == 0;
        let centroids = random_rows(&mut r, k, d, lattice);
        let model = KMeansModel {
            k,
            centroids: centroids.clone(),
            inertia: 0.0,
            assignments: Vec::new(),
            iterations_run: 0,
            seed: 0,
            inertia_trace: Vec::new(),
        };
        for p in random_rows(&mut r, 50, d, lattice) {
            let dists: Vec<f64> = centroids.iter().map(|c| euclid(&p, c)).collect();
            let min = dists.iter().cloned().fold(f64::INFINITY, f64::min);
            let expected = dists.iter().position(|&v| v == min).unwrap();
            if drought_regimes::clustering::assign(&p, &model).unwrap() != expected {
                out.mismatches += 1;
            }
        }
        out.instances += 1;
    }
    out
}

pub fn oracle_wcss() -> OracleOutcome {
    let mut out = outcome("wcss");
    for s in 0..INSTANCES as u64 {
        let mut r = rng(1000 + s);
        let n = r.random_range(5..200);
        let d = r.random_range(1..6);
        let k = r.random_range(1..5.min(n));
        let rows = random_rows(&mut r, n, d, false);
        let labels = random_labels(&mut r, n, k);
        let centroids = random_rows(&mut r, k, d, false);
        let mut expected = 0.0;
        for (c, centroid) in centroids.iter().enumerate() {
            for j in 0..d {
                for (row, _) in rows.iter().zip(&labels).filter(|(_, &l)| l == c) {
                    expected += (row[j] - centroid[j]).powi(2);
                }
            }
        }
        let m = FeatureMatrix::from_rows(&rows).unwrap();
        let got = wcss(&m, &labels, &centroids).unwrap();
        out.max_rel_err = out.max_rel_err.max(rel_err(got, expected));
        out.instances += 1;
    }
    out
}

pub fn oracle_silhouette() -> OracleOutcome {
    let mut out = outcome("silhouette");
    for s in 0..INSTANCES as u64 {
        let mut r = rng(2000 + s);
        let n = r.random_range(10..=300);
        let d = r.random_range(1..5);
        let k = r.random_range(2..6);
        let rows = random_rows(&mut r, n, d, s % 3 == 0);
        let labels = random_labels(&mut r, n, k);
        let dm: Vec<Vec<f64>> = rows.iter().map(|a| rows.iter().map(|b| euclid(a, b)).collect()).collect();
        let mut total = 0.0;
        for i in 0..n {
            let own: Vec<usize> = (0..n).filter(|&j| j != i && labels[j] == labels[i]).collect();
            if own.is_empty() {
                continue;
            }
            let a = own.iter().map(|&j| dm[i][j]).sum::<f64>() / own.len() as f64;
            let mut b = f64::INFINITY;
            for c in (0..k).filter(|&c| c != labels[i]) {
                let members: Vec<usize> = (0..n).filter(|&j| labels[j] == c).collect();
                let mean = members.iter().map(|&j| dm[i][j]).sum::<f64>() / members.len() as f64;
                b = b.min(mean);
            }
            let denom = a.max(b);
            if denom > 0.0 {
                total += (b - a) / denom;
            }
        }
        let expected = total / n as f64;
        let m = FeatureMatrix::from_rows(&rows).unwrap();
        let got = silhouette_score(&m, &labels, n, 7).unwrap();
        out.max_rel_err = out.max_rel_err.max(rel_err(got, expected));
        out.instances += 1;
    }
    out
}

pub fn oracle_knn() -> OracleOutcome {
    let mut out = outcome("knn");
    for s in 0..INSTANCES as u64 {
        let mut r = rng(3000 + s);
        let n = r.random_range(5..150);
        let d = r.random_range(1..5);
        let classes = r.random_range(2..5.min(n));
        let k = r.random_range(1..=n.min(9));
        let lattice = s % 2 == 0;
        let rows = random_rows(&mut r, n, d, lattice);
        let labels = random_labels(&mut r, n, classes);
        let model = knn_fit(&FeatureMatrix::from_rows(&rows).unwrap(), &labels, k).unwrap();
        for q in random_rows(&mut r, 20, d, lattice) {
            let mut order: Vec<(f64, usize)> = rows.iter().enumerate().map(|(i, p)| (euclid(&q, p), i)).collect();
            order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let mut votes = vec![0usize; classes];
            for &(_, i) in &order[..k] {
                votes[labels[i]] += 1;
            }
            let top = *votes.iter().max().unwrap();
            let expected = votes.iter().position(|&v| v == top).unwrap();
            if model.predict(&q).unwrap() != expected {
                out.mismatches += 1;
            }
        }
        out.instances += 1;
    }
    out
}

pub fn oracle_gnb_posterior() -> OracleOutcome {
    let mut out = outcome("gaussian_nb_posterior");
    for s in 0..INSTANCES as u64 {
        let mut r = rng(4000 + s);
        let d = r.random_range(1..4);
        let classes = r.random_range(2..4);
        let n = r.random_range(3 * classes..120);
        let rows = random_rows(&mut r, n, d, false);
        let mut labels = random_labels(&mut r, n, classes);
        // At least two rows per class.
        for c in 0..classes {
            labels[c] = c;
            labels[classes + c] = c;
        }
        let model = gnb_fit(&FeatureMatrix::from_rows(&rows).unwrap(), &labels).unwrap();

        let max_var = (0..d)
            .map(|j| {
                let m = rows.iter().map(|x| x[j]).sum::<f64>() / n as f64;
                rows.iter().map(|x| (x[j] - m).powi(2)).sum::<f64>() / n as f64
            })
            .fold(0.0, f64::max);
        let eps = 1e-9 * max_var;
        let mut params = Vec::new();
        for c in 0..classes {
            let members: Vec<&Vec<f64>> = rows.iter().zip(&labels).filter(|(_, &l)| l == c).map(|(x, _)| x).collect();
            let cnt = members.len() as f64;
            let means: Vec<f64> = (0..d).map(|j| members.iter().map(|x| x[j]).sum::<f64>() / cnt).collect();
            let vars: Vec<f64> = (0..d)
                .map(|j| members.iter().map(|x| (x[j] - means[j]).powi(2)).sum::<f64>() / cnt + eps)
                .collect();
            params.push((cnt / n as f64, means, vars));
        }
        for q in random_rows(&mut r, 10, d, false) {
            let joint: Vec<f64> = params
                .iter()
                .map(|(prior, means, vars)| {
                    let mut p = *prior;
                    for j in 0..d {
                        p *= (-(q[j] - means[j]).powi(2) / (2.0 * vars[j])).exp()
                            / (2.0 * std::f64::consts::PI * vars[j]).sqrt();
                    }
                    p
                })
                .collect();
            let z: f64 = joint.iter().sum();
            let got = model.predict_log_proba(&q).unwrap();
            for (lp, p) in got.iter().zip(&joint) {
                let expected = p / z;
                // Posteriors that underflow the linear-space oracle carry no information.
                if expected > 1e-250 {
                    out.max_rel_err = out.max_rel_err.max(rel_err(lp.exp(), expected));
                }
            }
        }
        out.instances += 1;
    }
    out
}

pub fn oracle_gini() -> OracleOutcome {
    let mut out = outcome("gini");
    for s in 0..INSTANCES as u64 {
        let mut r = rng(5000 + s);
        let classes = r.random_range(1..6);
        let n = r.random_range(1..300);
        let labels: Vec<usize> = (0..n).map(|_| r.random_range(0..classes)).collect();
        let mut counts = vec![0usize; classes];
        for &l in &labels {
            counts[l] += 1;
        }
        // Probability that two draws with replacement disagree.
        let mut differ = 0u64;
        for &a in &labels {
            for &b in &labels {
                if a != b {
                    differ += 1;
                }
            }
        }
        let expected = differ as f64 / (n * n) as f64;
        let got = gini(&counts).unwrap();
        let err = if expected == 0.0 { got.abs() } else { rel_err(got, expected) };
        out.max_rel_err = out.max_rel_err.max(err);
        out.instances += 1;
    }
    out
}

/// Median by selection: the value(s) with at most half the sample strictly
/// on either side.
fn median_by_rank(values: &[f64]) -> f64 {
    let n = values.len();
    let rank_value = |rank: usize| -> f64 {
        for &v in values {
            let below = values.iter().filter(|&&u| u < v).count();
            let equal = values.iter().filter(|&&u| u == v).count();
            if below <= rank && rank < below + equal {
                return v;
            }
        }
        unreachable!()
    };
    if n % 2 == 1 {
        rank_value(n / 2)
    } else {
        (rank_value(n / 2 - 1) + rank_value(n / 2)) / 2.0
    }
}

pub fn oracle_cluster_medians() -> OracleOutcome {
    let mut out = outcome("cluster_medians");
    for s in 0..INSTANCES as u64 {
        let mut spec = SynthSpec::preset(Preset::Ci);
        spec.districts = 1;
        spec.start_year = 2013;
        spec.end_year = 2013;
        spec.end_doy = Some(120);
        let data = generate(&spec, s).unwrap();
        let mut r = rng(6000 + s);
        let k = r.random_range(1..6);
        let labels = random_labels(&mut r, data.dataset.len(), k);
        let profile = profile_clusters(&data.dataset, &labels).unwrap();
        for (p, name) in WEATHER_PARAMETERS.iter().enumerate() {
            let column: Vec<f64> = data.dataset.records().iter().map(|rec| rec.weather()[p]).collect();
            for c in 0..k {
                let vals: Vec<f64> = column.iter().zip(&labels).filter(|(_, &l)| l == c).map(|(v, _)| *v).collect();
                let expected = median_by_rank(&vals);
                let got = profile.stat(c, name).unwrap().median;
                out.max_rel_err = out.max_rel_err.max(rel_err(got, expected));
            }
        }
        out.instances += 1;
    }
    out
}

pub fn all_oracles() -> Vec<OracleOutcome> {
    vec![
        oracle_assign(),
        oracle_wcss(),
        oracle_silhouette(),
        oracle_knn(),
        oracle_gnb_posterior(),
        oracle_gini(),
        oracle_cluster_medians(),
    ]
}
