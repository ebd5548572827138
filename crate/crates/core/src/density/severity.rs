//! Mapping of canonical clusters to drought-severity labels.

use serde::{Deserialize, Serialize};

use super::daywise::{dominant_intervals, DayRange};
use super::kde::DensityGrid;
use super::profile::ClusterProfile;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Extremity {
    Lower,
    Moderate,
    Higher,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeverityRule {
    pub cluster: usize,
    pub extremity: Extremity,
    pub season: String,
}

/// Canonical-id → extremity table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeverityMapping {
    pub rules: Vec<SeverityRule>,
}

impl Default for SeverityMapping {
    /// Wettest cluster "Lower", middle "Higher", driest "Moderate". The
    /// extremity order deliberately does not follow moisture rank.
    fn default() -> Self {
        let rule = |cluster, extremity, season: &str| SeverityRule {
            cluster,
            extremity,
            season: season.to_string(),
        };
        SeverityMapping {
            rules: vec![
                rule(0, Extremity::Lower, "Monsoon"),
                rule(1, Extremity::Higher, "Winter"),
                rule(2, Extremity::Moderate, "Transitional/Dry Season"),
            ],
        }
    }
}

impl SeverityMapping {
    pub fn rule(&self, cluster: usize) -> Option<&SeverityRule> {
        self.rules.iter().find(|r| r.cluster == cluster)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeverityLabel {
    pub cluster: usize,
    pub extremity: Extremity,
    pub season: String,
    pub median_gwettop: Option<f64>,
    /// Intervals where this cluster has the highest day-wise density.
    pub dominant_days: Vec<DayRange>,
}

/// Labels every profiled cluster through `mapping`; dominant day ranges are
/// attached when a day-wise density grid is given.
pub fn label_severity(
    profile: &ClusterProfile,
    mapping: &SeverityMapping,
    daywise: Option<&DensityGrid>,
) -> Result<Vec<SeverityLabel>> {
    let intervals = daywise.map(|g| {
        let runs = dominant_intervals(g);
        g.series
            .iter()
            .map(|s| s.cluster)
            .zip(runs)
            .collect::<Vec<_>>()
    });
    profile
        .clusters
        .iter()
        .map(|c| {
            let rule = mapping.rule(c.cluster).ok_or_else(|| {
                Error::Config(format!("severity mapping has no entry for cluster {}", c.cluster))
            })?;
            let dominant_days = intervals
                .as_ref()
                .and_then(|iv| iv.iter().find(|(id, _)| *id == c.cluster))
                .map(|(_, r)| r.clone())
                .unwrap_or_default();
            Ok(SeverityLabel {
                cluster: c.cluster,
                extremity: rule.extremity,
                season: rule.season.clone(),
                median_gwettop: profile.stat(c.cluster, "GWETTOP").map(|s| s.median),
                dominant_days,
            })
        })
        .collect()
}
