//! End-to-end orchestration behind a JSON config, with a manifest recording
//! settings, seeds, input and output digests, and stage timings.

pub mod config;
pub mod manifest;
pub mod stages;

pub use config::{
    AnalysisConfig, BgmConfig, ClassificationConfig, ClusteringConfig, Config, FeatureConfig, IngestConfig,
    ModelChoice, Source, SynthSource,
};
pub use manifest::{read_manifest, sha256_hex, FileDigest, RunContext, RunManifest, Seeds};
pub use stages::{
    feature_matrix, load_cleaned_dataset, read_assignments_csv, regime_recovery, run_all, run_analyze,
    run_classify, run_cluster, run_ingest, run_synth, synth_spec, AnalysisReport, ClassifierReport,
    ClusterModelKind, ClusterOutput, IngestOutput, MetricsReport, ModelArtifact, RunAllOutput, SilhouetteRow,
    SynthOutput,
};

/// Environment variable holding the default output directory.
pub const OUT_DIR_ENV: &str = "DROUGHT_OUT_DIR";
