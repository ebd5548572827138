//! Drought-severity regime discovery from daily satellite weather records.
//!
//! The pipeline runs in five stages, each in its own module:
//!
//! - [`ingest`] parses per-district daily CSV exports and merges them into a
//!   cleaned, ordered [`Dataset`].
//! - [`preprocess`] selects the weather parameters, standardizes them and
//!   draws the seeded train/test split.
//! - [`clustering`] discovers regimes with K-means and a variational Bayesian
//!   Gaussian mixture, validated by silhouette scores and the elbow method.
//! - [`classification`] trains KNN, Gaussian naive Bayes, a CART decision
//!   tree and a random forest on the regime labels.
//! - [`density`] profiles regimes, maps them to drought-severity labels and
//!   estimates day-of-year and geographic kernel densities.
//!
//! [`synth`] generates seeded data with known regimes, and [`pipeline`]
//! wires the stages together behind a JSON config and a run manifest.

pub mod classification;
pub mod clustering;
pub mod density;
pub mod error;
pub mod ingest;
pub mod pipeline;
pub mod preprocess;
pub mod stats;
pub mod synth;

pub(crate) mod seeding;

pub use error::{Error, ErrorCategory, Result};
pub use ingest::{Dataset, WeatherRecord};
pub use preprocess::FeatureMatrix;
