//! Regime profiles, severity labels and kernel density estimates.

pub mod daywise;
pub mod geo;
pub mod kde;
pub mod profile;
pub mod severity;

pub use daywise::{daywise_density, dominant_intervals, DayRange};
pub use geo::{district_shares, geo_density, write_district_shares_csv, DistrictShare, GeoGridSpec};
pub use kde::{kde_1d, kde_2d, linear_grid, scott_bandwidth, DensityGrid, DensitySeries, GridAxis};
pub use profile::{profile_clusters, ClusterProfile, ClusterSummary, ParamStats};
pub use severity::{label_severity, Extremity, SeverityLabel, SeverityMapping, SeverityRule};
