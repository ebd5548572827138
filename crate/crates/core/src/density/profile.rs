//! Per-cluster parameter summaries (boxplot and radar data).

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Dataset, WEATHER_PARAMETERS};
use crate::stats::{mean, quantile_sorted, variance};

/// Order statistics of one parameter within one cluster, in raw units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

impl ParamStats {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("no values to summarize".into()));
        }
        let mut sorted = values.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        Ok(ParamStats {
            min: sorted[0],
            q1: quantile_sorted(&sorted, 0.25),
            median: quantile_sorted(&sorted, 0.5),
            q3: quantile_sorted(&sorted, 0.75),
            max: sorted[sorted.len() - 1],
            mean: mean(values),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub cluster: usize,
    pub count: usize,
    /// Same order as [`ClusterProfile::parameters`].
    pub stats: Vec<ParamStats>,
    /// Mean standardized value per parameter, for radar plots.
    pub radar: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterProfile {
    pub parameters: Vec<String>,
    pub clusters: Vec<ClusterSummary>,
}

impl ClusterProfile {
    pub fn parameter_index(&self, name: &str) -> Option<usize> {
        self.parameters.iter().position(|p| p == name)
    }

    pub fn stat(&self, cluster: usize, parameter: &str) -> Option<&ParamStats> {
        let j = self.parameter_index(parameter)?;
        self.clusters.get(cluster).map(|c| &c.stats[j])
    }

    pub fn total_count(&self) -> usize {
        self.clusters.iter().map(|c| c.count).sum()
    }

    /// `cluster,parameter,min,q1,median,q3,max,mean`, one row per pair.
    pub fn write_boxplot_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["cluster", "parameter", "min", "q1", "median", "q3", "max", "mean"])?;
        for c in &self.clusters {
            for (name, s) in self.parameters.iter().zip(&c.stats) {
                w.write_record([
                    c.cluster.to_string(),
                    name.clone(),
                    s.min.to_string(),
                    s.q1.to_string(),
                    s.median.to_string(),
                    s.q3.to_string(),
                    s.max.to_string(),
                    s.mean.to_string(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io("boxplot", e))?;
        Ok(())
    }

    /// `cluster,<parameter...>` rows of radar means.
    pub fn write_radar_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["cluster".to_string()];
        header.extend(self.parameters.iter().cloned());
        w.write_record(&header)?;
        for c in &self.clusters {
            let mut rec = vec![c.cluster.to_string()];
            rec.extend(c.radar.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("radar", e))?;
        Ok(())
    }
}

/// Summarizes the 11 weather parameters for clusters `0..k`, where `k` is
/// one past the largest id in `assignments`.
pub fn profile_clusters(dataset: &Dataset, assignments: &[usize]) -> Result<ClusterProfile> {
    if assignments.len() != dataset.len() {
        return Err(Error::DimensionMismatch {
            expected: dataset.len(),
            got: assignments.len(),
        });
    }
    if dataset.is_empty() {
        return Err(Error::EmptyInput("empty dataset".into()));
    }
    let k = assignments.iter().max().map_or(0, |&m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &a) in assignments.iter().enumerate() {
        members[a].push(i);
    }
    if let Some(c) = members.iter().position(Vec::is_empty) {
        return Err(Error::EmptyInput(format!("cluster {c} has no members")));
    }
    let records = dataset.records();
    let columns: Vec<Vec<f64>> = (0..WEATHER_PARAMETERS.len())
        .map(|j| records.iter().map(|r| r.weather()[j]).collect())
        .collect();
    let scaling: Vec<(f64, f64)> = columns
        .iter()
        .map(|col| {
            let m = mean(col);
            let sd = variance(col, 0).sqrt();
            (m, if sd > 1e-12 * (1.0 + m.abs()) { sd } else { 1.0 })
        })
        .collect();
    let clusters = members
        .iter()
        .enumerate()
        .map(|(c, rows)| {
            let mut stats = Vec::with_capacity(columns.len());
            let mut radar = Vec::with_capacity(columns.len());
            for (col, &(m, sd)) in columns.iter().zip(&scaling) {
                let vals: Vec<f64> = rows.iter().map(|&i| col[i]).collect();
                let s = ParamStats::from_values(&vals)?;
                radar.push(mean(&vals.iter().map(|v| (v - m) / sd).collect::<Vec<_>>()));
                stats.push(s);
            }
            Ok(ClusterSummary {
                cluster: c,
                count: rows.len(),
                stats,
                radar,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ClusterProfile {
        parameters: WEATHER_PARAMETERS.iter().map(|s| s.to_string()).collect(),
        clusters,
    })
}
