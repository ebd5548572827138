//! Run configuration: one JSON document with a default for every key except
//! the data source.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classification::{ForestParams, MaxFeatures, TreeParams};
use crate::clustering::{BgmParams, KMeansParams, DEFAULT_SAMPLE_CAP};
use crate::density::{GeoGridSpec, SeverityMapping};
use crate::error::{Error, Result};
use crate::ingest::DEFAULT_FILL_VALUE;
use crate::synth::Preset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Master seed; every stage derives its own stream from it.
    pub seed: u64,
    /// Where `run-all` reads data from. No default.
    pub source: Option<Source>,
    pub ingest: IngestConfig,
    pub features: FeatureConfig,
    pub clustering: ClusteringConfig,
    pub classification: ClassificationConfig,
    pub analysis: AnalysisConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 42,
            source: None,
            ingest: IngestConfig::default(),
            features: FeatureConfig::default(),
            clustering: ClusteringConfig::default(),
            classification: ClassificationConfig::default(),
            analysis: AnalysisConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Source {
    /// Export-format CSV files, one or more per district.
    Files(Vec<PathBuf>),
    /// Generate data first, then ingest the written files.
    Synth(SynthSource),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSource {
    pub preset: Preset,
    /// Regime/extent specification (JSON); overrides `preset`.
    pub spec: Option<PathBuf>,
}

impl Default for SynthSource {
    fn default() -> Self {
        SynthSource {
            preset: Preset::Ci,
            spec: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub fill_value: f64,
    pub strict: bool,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            fill_value: DEFAULT_FILL_VALUE,
            strict: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    /// Add LAT, LON, YEAR and DOY to the learning features.
    pub include_identifiers: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    /// Higher silhouette wins, K-means on ties.
    #[default]
    Auto,
    Kmeans,
    Bgm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusteringConfig {
    pub k_min: usize,
    pub k_max: usize,
    /// Skip elbow detection and use this k.
    pub k: Option<usize>,
    pub n_init: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub silhouette_sample_cap: usize,
    pub model: ModelChoice,
    pub bgm: BgmConfig,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        let km = KMeansParams::new(1);
        ClusteringConfig {
            k_min: 1,
            k_max: 8,
            k: None,
            n_init: km.n_init,
            max_iter: km.max_iter,
            tol: km.tol,
            silhouette_sample_cap: DEFAULT_SAMPLE_CAP,
            model: ModelChoice::Auto,
            bgm: BgmConfig::default(),
        }
    }
}

/// Mixture settings; the truncation level is the chosen k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BgmConfig {
    pub alpha: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub reg_covar: f64,
    pub weight_floor: f64,
}

impl Default for BgmConfig {
    fn default() -> Self {
        let p = BgmParams::default();
        BgmConfig {
            alpha: p.alpha,
            max_iter: p.max_iter,
            tol: p.tol,
            reg_covar: p.reg_covar,
            weight_floor: p.weight_floor,
        }
    }
}

impl BgmConfig {
    pub fn params(&self, k_max: usize, seed: u64) -> BgmParams {
        BgmParams {
            k_max,
            alpha: self.alpha,
            seed,
            max_iter: self.max_iter,
            tol: self.tol,
            reg_covar: self.reg_covar,
            weight_floor: self.weight_floor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassificationConfig {
    /// Training fraction of the split.
    pub split_ratio: f64,
    pub k_neighbors: usize,
    pub tree: TreeParams,
    pub n_trees: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    /// Depth of the shallow comparison tree.
    pub baseline_depth: usize,
}

impl Default for ClassificationConfig {
    fn default() -> Self {
        let f = ForestParams::default();
        ClassificationConfig {
            split_ratio: 0.8,
            k_neighbors: 5,
            tree: TreeParams::default(),
            n_trees: f.n_trees,
            max_features: f.max_features,
            bootstrap: f.bootstrap,
            baseline_depth: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Day-of-year grid spacing.
    pub doy_step: f64,
    pub geo_grid: GeoGridSpec,
    /// Explicit (lat, lon) bandwidths; Scott's rule per cluster when absent.
    pub geo_bandwidths: Option<(f64, f64)>,
    pub severity: SeverityMapping,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            doy_step: 1.0,
            geo_grid: GeoGridSpec::default(),
            geo_bandwidths: None,
            severity: SeverityMapping::default(),
        }
    }
}

impl Config {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Loads a config file. Relative source paths are resolved against the
    /// file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_json_str(&text)
            .map_err(|e| Error::Config(format!("{}: {}", path.display(), strip_prefix(&e))))?;
        if let Some(base) = path.parent() {
            config.resolve_paths(base);
        }
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut self.source {
            Some(Source::Files(paths)) => paths.iter_mut().for_each(fix),
            Some(Source::Synth(s)) => {
                if let Some(p) = s.spec.as_mut() {
                    fix(p)
                }
            }
            None => {}
        }
    }

    /// The data source, or a config error naming the missing key.
    pub fn require_source(&self) -> Result<&Source> {
        self.source
            .as_ref()
            .ok_or_else(|| Error::Config("missing key `source` (expected `files` or `synth`)".into()))
    }

    /// Rejects values no stage could run with.
    pub fn validate(&self) -> Result<()> {
        let c = &self.clustering;
        if c.k_min == 0 || c.k_min > c.k_max {
            return Err(Error::Config(format!(
                "clustering.k_min ({}) must be in 1..=clustering.k_max ({})",
                c.k_min, c.k_max
            )));
        }
        if c.k.is_none() && c.k_max - c.k_min < 2 {
            return Err(Error::Config(
                "elbow detection needs at least 3 values of k between clustering.k_min and clustering.k_max".into(),
            ));
        }
        if c.k == Some(0) || c.k == Some(1) {
            return Err(Error::Config("clustering.k must be at least 2".into()));
        }
        if c.n_init == 0 || c.max_iter == 0 {
            return Err(Error::Config("clustering.n_init and clustering.max_iter must be positive".into()));
        }
        if c.silhouette_sample_cap < 3 {
            return Err(Error::Config("clustering.silhouette_sample_cap must be at least 3".into()));
        }
        let s = self.classification.split_ratio;
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Config(format!("classification.split_ratio must be in (0, 1), got {s}")));
        }
        if self.classification.n_trees == 0 || self.classification.k_neighbors == 0 {
            return Err(Error::Config(
                "classification.n_trees and classification.k_neighbors must be positive".into(),
            ));
        }
        if self.analysis.doy_step.is_nan() || self.analysis.doy_step <= 0.0 {
            return Err(Error::Config("analysis.doy_step must be positive".into()));
        }
        Ok(())
    }

    pub fn kmeans_params(&self, k: usize, seed: u64) -> KMeansParams {
        KMeansParams {
            k,
            seed,
            n_init: self.clustering.n_init,
            max_iter: self.clustering.max_iter,
            tol: self.clustering.tol,
        }
    }

    pub fn forest_params(&self, seed: u64) -> ForestParams {
        let c = &self.classification;
        ForestParams {
            n_trees: c.n_trees,
            max_features: c.max_features,
            bootstrap: c.bootstrap,
            seed,
            tree: c.tree,
        }
    }
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::Config(msg) => msg.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_all_defaults() {
        let c = Config::from_json_str("{}").unwrap();
        assert_eq!(c, Config::default());
        assert!(c.validate().is_ok());
        assert!(matches!(c.require_source(), Err(Error::Config(m)) if m.contains("`source`")));
    }

    #[test]
    fn nested_missing_key_is_named() {
        let err = Config::from_json_str(r#"{"source": {"files": null}}"#).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let c = Config::from_json_str(r#"{"source": {"synth": {}}, "seed": 7}"#).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.source, Some(Source::Synth(SynthSource::default())));
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = Config::from_json_str(r#"{"clustering": {"kmax": 4}}"#).unwrap_err();
        assert!(err.to_string().contains("kmax"));
    }

    #[test]
    fn round_trip() {
        let mut c = Config {
            source: Some(Source::Files(vec!["a.csv".into()])),
            ..Config::default()
        };
        c.clustering.k = Some(3);
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(Config::from_json_str(&json).unwrap(), c);
    }
}
