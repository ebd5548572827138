//! Variational Bayesian Gaussian mixture with a symmetric Dirichlet prior
//! `Dir(α/K, …, α/K)` over the mixing weights and a Gaussian-Wishart prior
//! over each component's mean and precision.
//!
//! Fitting is coordinate ascent on the evidence lower bound: the E-step sets
//! the responsibilities `q(Z)` given `q(π, μ, Λ)`, the M-step updates the
//! conjugate posteriors given `q(Z)`. Both steps are exact maximizations, so
//! the bound never decreases.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

use super::kmeans::{kmeans_fit, KMeansParams};
use super::linalg::{chol_inv_quad, chol_inverse, chol_logdet, cholesky, trace_product};
use crate::error::{Error, Result};
use crate::preprocess::FeatureMatrix;
use crate::stats::{argmax, log_sum_exp};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BgmParams {
    /// Truncation level K.
    pub k_max: usize,
    /// Dirichlet concentration α; each weight gets α/K.
    pub alpha: f64,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop when the per-row ELBO improvement falls below this. Redundant
    /// components drain slowly, so the default is tight.
    pub tol: f64,
    /// Added to the diagonal of the prior scale matrix.
    pub reg_covar: f64,
    /// Components with a larger expected weight count as effective.
    pub weight_floor: f64,
}

impl Default for BgmParams {
    fn default() -> Self {
        BgmParams {
            k_max: 8,
            alpha: 1.0,
            seed: 0,
            max_iter: 5000,
            tol: 1e-10,
            reg_covar: 1e-6,
            weight_floor: 0.02,
        }
    }
}

/// Hyperparameters of the prior, derived from the data at fit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BgmPrior {
    /// α/K for every component.
    pub weight_concentration: f64,
    pub mean: Vec<f64>,
    pub mean_precision: f64,
    pub degrees_of_freedom: f64,
    /// Inverse Wishart scale W₀⁻¹, row-major.
    pub scale_inv: Vec<f64>,
}

/// Posterior parameters of `q(π)` and `q(μ_k, Λ_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationalState {
    pub weight_concentration: Vec<f64>,
    pub mean_precision: Vec<f64>,
    pub degrees_of_freedom: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    /// W_k⁻¹ per component, row-major.
    pub scale_inv: Vec<Vec<f64>>,
    pub prior: BgmPrior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BgmModel {
    pub k_max: usize,
    pub n_features: usize,
    pub alpha: f64,
    pub seed: u64,
    /// Expected mixing weights E[π_k].
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    /// Covariance per component, `W_k⁻¹ / ν_k`, as nested rows.
    pub covariances: Vec<Vec<Vec<f64>>>,
    pub elbo_trace: Vec<f64>,
    pub iterations_run: usize,
    pub converged: bool,
    pub variational_state: VariationalState,
    /// Row-major `n × k_max` posterior over components for the fitted rows.
    #[serde(skip)]
    pub responsibilities: Vec<f64>,
}

impl BgmModel {
    pub fn n_rows(&self) -> usize {
        self.responsibilities.len().checked_div(self.k_max).unwrap_or(0)
    }

    pub fn responsibilities_row(&self, i: usize) -> &[f64] {
        &self.responsibilities[i * self.k_max..(i + 1) * self.k_max]
    }

    /// Most probable component per fitted row, lowest index on ties.
    pub fn assignments(&self) -> Vec<usize> {
        self.responsibilities
            .chunks_exact(self.k_max)
            .map(argmax)
            .collect()
    }

    pub fn effective_components(&self, weight_floor: f64) -> Vec<usize> {
        (0..self.k_max)
            .filter(|&k| self.weights[k] > weight_floor)
            .collect()
    }

    /// Posterior over components for an unseen (scaled) point.
    pub fn predict_proba(&self, point: &[f64]) -> Result<Vec<f64>> {
        if point.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: point.len(),
            });
        }
        let cache = ComponentCache::new(&self.variational_state)?;
        let mut out = vec![0.0; self.k_max];
        let mut scratch = vec![0.0; self.n_features];
        cache.responsibilities(&self.variational_state, point, &mut out, &mut scratch);
        Ok(out)
    }

    pub fn predict(&self, point: &[f64]) -> Result<usize> {
        Ok(argmax(&self.predict_proba(point)?))
    }
}

/// Derived per-component quantities reused across the E-step and the bound.
struct ComponentCache {
    d: usize,
    /// Cholesky factor of W_k⁻¹.
    chol: Vec<Vec<f64>>,
    e_ln_pi: Vec<f64>,
    e_ln_lambda: Vec<f64>,
    ln_det_w: Vec<f64>,
}

impl ComponentCache {
    fn new(state: &VariationalState) -> Result<Self> {
        let d = state.prior.mean.len();
        let k = state.means.len();
        let total: f64 = state.weight_concentration.iter().sum();
        let psi_total = digamma(total);
        let mut chol = Vec::with_capacity(k);
        let mut e_ln_pi = Vec::with_capacity(k);
        let mut e_ln_lambda = Vec::with_capacity(k);
        let mut ln_det_w = Vec::with_capacity(k);
        for j in 0..k {
            let l = cholesky(&state.scale_inv[j], d).ok_or_else(|| {
                Error::NonFinite(format!("scale matrix of component {j} is not positive definite"))
            })?;
            let ldw = -chol_logdet(&l, d);
            let nu = state.degrees_of_freedom[j];
            let psi_sum: f64 = (1..=d).map(|i| digamma((nu + 1.0 - i as f64) / 2.0)).sum();
            e_ln_lambda.push(psi_sum + d as f64 * 2f64.ln() + ldw);
            e_ln_pi.push(digamma(state.weight_concentration[j]) - psi_total);
            ln_det_w.push(ldw);
            chol.push(l);
        }
        Ok(ComponentCache {
            d,
            chol,
            e_ln_pi,
            e_ln_lambda,
            ln_det_w,
        })
    }

    /// Writes normalized responsibilities for one row into `out`.
    fn responsibilities(
        &self,
        state: &VariationalState,
        x: &[f64],
        out: &mut [f64],
        scratch: &mut [f64],
    ) {
        let d = self.d as f64;
        let mut diff = vec![0.0; self.d];
        for (j, o) in out.iter_mut().enumerate() {
            for ((df, xv), mv) in diff.iter_mut().zip(x).zip(&state.means[j]) {
                *df = xv - mv;
            }
            let q = chol_inv_quad(&self.chol[j], self.d, &diff, scratch);
            *o = self.e_ln_pi[j] + 0.5 * self.e_ln_lambda[j]
                - 0.5 * d * (2.0 * PI).ln()
                - 0.5 * (d / state.mean_precision[j] + state.degrees_of_freedom[j] * q);
        }
        let norm = log_sum_exp(out);
        for o in out.iter_mut() {
            *o = (*o - norm).exp();
        }
    }
}

fn ln_wishart_norm(ln_det_w: f64, nu: f64, d: usize) -> f64 {
    let df = d as f64;
    -0.5 * nu * ln_det_w
        - 0.5 * nu * df * 2f64.ln()
        - 0.25 * df * (df - 1.0) * PI.ln()
        - (1..=d).map(|i| ln_gamma((nu + 1.0 - i as f64) / 2.0)).sum::<f64>()
}

fn ln_dirichlet_norm(concentration: &[f64]) -> f64 {
    ln_gamma(concentration.iter().sum()) - concentration.iter().map(|&a| ln_gamma(a)).sum::<f64>()
}

/// Sufficient statistics from the M-step, kept for the bound.
struct MStepStats {
    counts: Vec<f64>,
    /// Σ_n r_nk (x_n − m_k)(x_n − m_k)ᵀ around the updated means.
    scatter: Vec<Vec<f64>>,
}

fn m_step(
    matrix: &FeatureMatrix,
    resp: &[f64],
    k: usize,
    prior: &BgmPrior,
) -> (VariationalState, MStepStats) {
    let d = matrix.n_cols();
    let mut counts = vec![0.0; k];
    let mut sums = vec![vec![0.0; d]; k];
    for (row, r) in matrix.rows().zip(resp.chunks_exact(k)) {
        for j in 0..k {
            counts[j] += r[j];
            for (s, v) in sums[j].iter_mut().zip(row) {
                *s += r[j] * v;
            }
        }
    }
    let mean_precision: Vec<f64> = counts.iter().map(|n| prior.mean_precision + n).collect();
    let degrees_of_freedom: Vec<f64> = counts.iter().map(|n| prior.degrees_of_freedom + n).collect();
    let weight_concentration: Vec<f64> = counts.iter().map(|n| prior.weight_concentration + n).collect();
    let means: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            (0..d)
                .map(|i| (prior.mean_precision * prior.mean[i] + sums[j][i]) / mean_precision[j])
                .collect()
        })
        .collect();

    let mut scatter = vec![vec![0.0; d * d]; k];
    let mut diff = vec![0.0; d];
    for (row, r) in matrix.rows().zip(resp.chunks_exact(k)) {
        for j in 0..k {
            if r[j] == 0.0 {
                continue;
            }
            for ((df, xv), mv) in diff.iter_mut().zip(row).zip(&means[j]) {
                *df = xv - mv;
            }
            let s = &mut scatter[j];
            for a in 0..d {
                let ra = r[j] * diff[a];
                for b in 0..=a {
                    s[a * d + b] += ra * diff[b];
                }
            }
        }
    }
    let mut scale_inv = Vec::with_capacity(k);
    for j in 0..k {
        let s = &mut scatter[j];
        for a in 0..d {
            for b in 0..a {
                s[b * d + a] = s[a * d + b];
            }
        }
        let mut w = prior.scale_inv.clone();
        for a in 0..d {
            let da = means[j][a] - prior.mean[a];
            for b in 0..d {
                let db = means[j][b] - prior.mean[b];
                w[a * d + b] += s[a * d + b] + prior.mean_precision * da * db;
            }
        }
        scale_inv.push(w);
    }
    (
        VariationalState {
            weight_concentration,
            mean_precision,
            degrees_of_freedom,
            means,
            scale_inv,
            prior: prior.clone(),
        },
        MStepStats { counts, scatter },
    )
}

fn e_step(matrix: &FeatureMatrix, state: &VariationalState, resp: &mut [f64]) -> Result<()> {
    let cache = ComponentCache::new(state)?;
    let k = state.means.len();
    let d = matrix.n_cols();
    resp.par_chunks_mut(k)
        .zip(matrix.values().par_chunks(d))
        .with_min_len(512)
        .for_each_init(
            || vec![0.0; d],
            |scratch, (out, row)| cache.responsibilities(state, row, out, scratch),
        );
    if resp.iter().any(|r| !r.is_finite()) {
        return Err(Error::NonFinite("responsibilities".into()));
    }
    Ok(())
}

/// Evidence lower bound for the current `q(Z)` (`resp`) and `q(θ)` (`state`,
/// computed from `resp` by [`m_step`]).
fn elbo(state: &VariationalState, stats: &MStepStats, resp: &[f64]) -> Result<f64> {
    let cache = ComponentCache::new(state)?;
    let prior = &state.prior;
    let d = prior.mean.len();
    let df = d as f64;
    let k = state.means.len();
    let ln_2pi = (2.0 * PI).ln();

    let prior_chol = cholesky(&prior.scale_inv, d)
        .ok_or_else(|| Error::NonFinite("prior scale matrix is not positive definite".into()))?;
    let prior_ln_det_w = -chol_logdet(&prior_chol, d);
    let ln_b0 = ln_wishart_norm(prior_ln_det_w, prior.degrees_of_freedom, d);

    let mut bound = 0.0;
    let mut scratch = vec![0.0; d];
    for j in 0..k {
        let n_k = stats.counts[j];
        let beta = state.mean_precision[j];
        let nu = state.degrees_of_freedom[j];
        let e_ln_lambda = cache.e_ln_lambda[j];
        let w = chol_inverse(&cache.chol[j], d);

        // E[ln p(X | Z, μ, Λ)]
        bound += 0.5
            * (n_k * (e_ln_lambda - df / beta - df * ln_2pi)
                - nu * trace_product(&w, &stats.scatter[j], d));
        // E[ln p(Z | π)]
        bound += n_k * cache.e_ln_pi[j];
        // E[ln p(μ, Λ)]
        let dm: Vec<f64> = state.means[j]
            .iter()
            .zip(&prior.mean)
            .map(|(a, b)| a - b)
            .collect();
        let quad = chol_inv_quad(&cache.chol[j], d, &dm, &mut scratch);
        bound += 0.5
            * (df * (prior.mean_precision / (2.0 * PI)).ln() + e_ln_lambda
                - df * prior.mean_precision / beta
                - prior.mean_precision * nu * quad)
            + ln_b0
            + 0.5 * (prior.degrees_of_freedom - df - 1.0) * e_ln_lambda
            - 0.5 * nu * trace_product(&prior.scale_inv, &w, d);
        // − E[ln q(μ, Λ)]
        let entropy_lambda = -ln_wishart_norm(cache.ln_det_w[j], nu, d)
            - 0.5 * (nu - df - 1.0) * e_ln_lambda
            + 0.5 * nu * df;
        bound -= 0.5 * e_ln_lambda + 0.5 * df * (beta / (2.0 * PI)).ln() - 0.5 * df - entropy_lambda;
    }
    // E[ln p(π)] − E[ln q(π)]
    let prior_conc = vec![prior.weight_concentration; k];
    bound += ln_dirichlet_norm(&prior_conc)
        + (prior.weight_concentration - 1.0) * cache.e_ln_pi.iter().sum::<f64>();
    bound -= ln_dirichlet_norm(&state.weight_concentration)
        + state
            .weight_concentration
            .iter()
            .zip(&cache.e_ln_pi)
            .map(|(a, e)| (a - 1.0) * e)
            .sum::<f64>();
    // − E[ln q(Z)]
    bound -= resp
        .iter()
        .filter(|&&r| r > 0.0)
        .map(|&r| r * r.ln())
        .sum::<f64>();
    if !bound.is_finite() {
        return Err(Error::NonFinite("evidence lower bound".into()));
    }
    Ok(bound)
}

fn build_prior(matrix: &FeatureMatrix, params: &BgmParams) -> BgmPrior {
    let n = matrix.n_rows() as f64;
    let d = matrix.n_cols();
    let mut mean = vec![0.0; d];
    for row in matrix.rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut cov = vec![0.0; d * d];
    for row in matrix.rows() {
        for a in 0..d {
            let da = row[a] - mean[a];
            for b in 0..=a {
                cov[a * d + b] += da * (row[b] - mean[b]);
            }
        }
    }
    let denom = (n - 1.0).max(1.0);
    for a in 0..d {
        for b in 0..=a {
            cov[a * d + b] /= denom;
            cov[b * d + a] = cov[a * d + b];
        }
        cov[a * d + a] += params.reg_covar;
    }
    BgmPrior {
        weight_concentration: params.alpha / params.k_max as f64,
        mean,
        mean_precision: 1.0,
        degrees_of_freedom: d as f64,
        scale_inv: cov,
    }
}

/// Fits the mixture. Responsibilities start from a single seeded K-means
/// partition at `k_max` clusters.
pub fn bgm_fit(matrix: &FeatureMatrix, params: &BgmParams) -> Result<BgmModel> {
    let n = matrix.n_rows();
    let d = matrix.n_cols();
    let k = params.k_max;
    if k == 0 {
        return Err(Error::InvalidParameter("k_max must be at least 1".into()));
    }
    if k > n {
        return Err(Error::InvalidParameter(format!(
            "k_max = {k} exceeds the {n} available rows"
        )));
    }
    if !(params.alpha > 0.0 && params.alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be positive, got {}",
            params.alpha
        )));
    }
    if params.reg_covar.is_nan() || params.reg_covar < 0.0 {
        return Err(Error::InvalidParameter("reg_covar must be non-negative".into()));
    }
    if n < 2 {
        return Err(Error::InsufficientData("mixture fit needs at least 2 rows".into()));
    }
    matrix.ensure_finite("mixture input")?;

    let prior = build_prior(matrix, params);
    let init = kmeans_fit(
        matrix,
        &KMeansParams {
            k,
            seed: params.seed,
            n_init: 1,
            max_iter: 300,
            tol: 1e-4,
        },
    )?;
    let mut resp = vec![0.0; n * k];
    for (i, &a) in init.assignments.iter().enumerate() {
        resp[i * k + a] = 1.0;
    }

    let (mut state, mut stats) = m_step(matrix, &resp, k, &prior);
    let mut trace = vec![elbo(&state, &stats, &resp)?];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < params.max_iter {
        iterations += 1;
        e_step(matrix, &state, &mut resp)?;
        let (s, st) = m_step(matrix, &resp, k, &prior);
        state = s;
        stats = st;
        let bound = elbo(&state, &stats, &resp)?;
        let prev = *trace.last().expect("non-empty trace");
        trace.push(bound);
        if (bound - prev).abs() / (n as f64) < params.tol {
            converged = true;
            break;
        }
    }

    let total: f64 = state.weight_concentration.iter().sum();
    let weights = state
        .weight_concentration
        .iter()
        .map(|a| a / total)
        .collect();
    let covariances = (0..k)
        .map(|j| {
            (0..d)
                .map(|a| {
                    (0..d)
                        .map(|b| state.scale_inv[j][a * d + b] / state.degrees_of_freedom[j])
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(BgmModel {
        k_max: k,
        n_features: d,
        alpha: params.alpha,
        seed: params.seed,
        weights,
        means: state.means.clone(),
        covariances,
        elbo_trace: trace,
        iterations_run: iterations,
        converged,
        variational_state: state,
        responsibilities: resp,
    })
}
