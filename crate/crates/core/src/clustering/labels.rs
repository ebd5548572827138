//! Canonical cluster ids: wettest regime first.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::stats::median;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterLabeling {
    /// Raw cluster id → canonical id.
    pub canonical_map: BTreeMap<usize, usize>,
    /// Median surface soil wetness (GWETTOP) per raw cluster.
    pub basis_statistic: BTreeMap<usize, f64>,
}

impl ClusterLabeling {
    pub fn canonical(&self, raw: usize) -> Option<usize> {
        self.canonical_map.get(&raw).copied()
    }

    pub fn apply(&self, raw: &[usize]) -> Result<Vec<usize>> {
        raw.iter()
            .map(|&r| {
                self.canonical(r)
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown cluster id {r}")))
            })
            .collect()
    }

    pub fn n_clusters(&self) -> usize {
        self.canonical_map.len()
    }
}

/// Ranks clusters by descending median GWETTOP of their member rows; raw id
/// breaks ties. Raw ids must be `0..m` with every id used.
pub fn canonicalize_labels(assignments: &[usize], dataset: &Dataset) -> Result<ClusterLabeling> {
    if assignments.len() != dataset.len() {
        return Err(Error::DimensionMismatch {
            expected: dataset.len(),
            got: assignments.len(),
        });
    }
    let wetness: Vec<f64> = dataset.records().iter().map(|r| r.gwettop).collect();
    canonicalize_by_statistic(assignments, &wetness)
}

/// [`canonicalize_labels`] against an arbitrary per-row basis value.
pub fn canonicalize_by_statistic(assignments: &[usize], basis: &[f64]) -> Result<ClusterLabeling> {
    if assignments.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            got: assignments.len(),
        });
    }
    if assignments.is_empty() {
        return Err(Error::EmptyInput("no assignments".into()));
    }
    let m = assignments.iter().max().map_or(0, |x| x + 1);
    let mut members: Vec<Vec<f64>> = vec![Vec::new(); m];
    for (&a, &v) in assignments.iter().zip(basis) {
        members[a].push(v);
    }
    if let Some(empty) = members.iter().position(Vec::is_empty) {
        return Err(Error::InvalidParameter(format!("cluster {empty} is empty")));
    }
    let medians: Vec<f64> = members.iter().map(|v| median(v)).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| medians[b].total_cmp(&medians[a]).then(a.cmp(&b)));
    let canonical_map = order
        .iter()
        .enumerate()
        .map(|(canonical, &raw)| (raw, canonical))
        .collect();
    let basis_statistic = medians.into_iter().enumerate().collect();
    Ok(ClusterLabeling {
        canonical_map,
        basis_statistic,
    })
}

/// Renumbers used ids to `0..m` in ascending raw order. Returns the compacted
/// labels and, per compact id, the original id.
pub fn compact_labels(assignments: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut used: Vec<usize> = assignments.to_vec();
    used.sort_unstable();
    used.dedup();
    let lookup: BTreeMap<usize, usize> = used.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    (assignments.iter().map(|a| lookup[a]).collect(), used)
}
