//! Regime discovery: K-means, the variational Bayesian Gaussian mixture,
//! silhouette validation, the elbow method and canonical labels.

pub mod bgm;
pub mod elbow;
pub mod kmeans;
pub mod labels;
pub(crate) mod linalg;
pub mod silhouette;

pub use bgm::{bgm_fit, BgmModel, BgmParams, BgmPrior, VariationalState};
pub use elbow::{curvatures, detect_elbow, elbow_sweep, elbow_sweep_models, ElbowPoint};
pub use kmeans::{assign, kmeans_fit, kmeans_fit_with_inits, wcss, KMeansModel, KMeansParams};
pub use labels::{canonicalize_by_statistic, canonicalize_labels, compact_labels, ClusterLabeling};
pub use silhouette::{silhouette_samples, silhouette_sample_rows, silhouette_score, DEFAULT_SAMPLE_CAP};
