//! Day-of-year cluster densities and their dominant intervals.

use serde::{Deserialize, Serialize};

use super::kde::{kde_1d, linear_grid, DensityGrid, DensitySeries, GridAxis};
use crate::error::{Error, Result};
use crate::ingest::Dataset;

/// Inclusive day-of-year interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayRange {
    pub start: u16,
    pub end: u16,
}

impl DayRange {
    pub fn overlaps(&self, start: u16, end: u16) -> bool {
        self.start <= end && start <= self.end
    }

    pub fn len(&self) -> u16 {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Per-cluster KDE of member DOY values on the grid `1, 1 + step, …, 366`.
pub fn daywise_density(dataset: &Dataset, assignments: &[usize], step: f64) -> Result<DensityGrid> {
    if assignments.len() != dataset.len() {
        return Err(Error::DimensionMismatch {
            expected: dataset.len(),
            got: assignments.len(),
        });
    }
    let k = assignments.iter().max().map_or(0, |&m| m + 1);
    let mut days: Vec<Vec<f64>> = vec![Vec::new(); k];
    for (r, &a) in dataset.records().iter().zip(assignments) {
        days[a].push(f64::from(r.doy));
    }
    let grid = linear_grid(1.0, 366.0, step)?;
    let series = days
        .iter()
        .enumerate()
        .map(|(c, samples)| {
            let g = kde_1d(samples, &grid, None)
                .map_err(|e| Error::InsufficientData(format!("day-wise density of cluster {c}: {e}")))?;
            let s = g.series.into_iter().next().expect("one series");
            Ok(DensitySeries { cluster: c, ..s })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityGrid {
        axis: GridAxis::DayOfYear,
        x: grid,
        y: Vec::new(),
        series,
    })
}

/// Maximal runs of grid points where a cluster's density strictly exceeds
/// every other cluster's, per series. Runs of different clusters are
/// disjoint because strict dominance has at most one winner per point.
pub fn dominant_intervals(grid: &DensityGrid) -> Vec<Vec<DayRange>> {
    let mut out = vec![Vec::new(); grid.series.len()];
    let mut current: Option<(usize, usize)> = None;
    let close = |out: &mut Vec<Vec<DayRange>>, run: Option<(usize, usize)>, end: usize| {
        if let Some((s, from)) = run {
            out[s].push(DayRange {
                start: grid.x[from].round() as u16,
                end: grid.x[end].round() as u16,
            });
        }
    };
    for i in 0..grid.x.len() {
        let winner = strict_winner(grid.series.iter().map(|s| s.values[i]));
        match (current, winner) {
            (Some((s, _)), Some(w)) if s == w => {}
            (run, w) => {
                if i > 0 {
                    close(&mut out, run, i - 1);
                }
                current = w.map(|w| (w, i));
            }
        }
    }
    if !grid.x.is_empty() {
        close(&mut out, current, grid.x.len() - 1);
    }
    out
}

fn strict_winner(values: impl Iterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    let mut tied = false;
    for (i, v) in values.enumerate() {
        match best {
            None => best = Some((i, v)),
            Some((_, b)) if v > b => {
                best = Some((i, v));
                tied = false;
            }
            Some((_, b)) if v == b => tied = true,
            _ => {}
        }
    }
    if tied {
        None
    } else {
        best.map(|(i, _)| i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(values: Vec<Vec<f64>>) -> DensityGrid {
        DensityGrid {
            axis: GridAxis::DayOfYear,
            x: (1..=values[0].len()).map(|d| d as f64).collect(),
            y: Vec::new(),
            series: values
                .into_iter()
                .enumerate()
                .map(|(c, values)| DensitySeries {
                    cluster: c,
                    n_samples: 1,
                    bandwidths: vec![1.0],
                    values,
                })
                .collect(),
        }
    }

    #[test]
    fn runs_split_at_crossovers_and_ties() {
        let g = grid(vec![
            vec![3.0, 3.0, 1.0, 1.0, 2.0, 3.0],
            vec![1.0, 2.0, 2.0, 1.0, 2.0, 1.0],
        ]);
        let iv = dominant_intervals(&g);
        assert_eq!(iv[0], vec![DayRange { start: 1, end: 2 }, DayRange { start: 6, end: 6 }]);
        assert_eq!(iv[1], vec![DayRange { start: 3, end: 3 }]);
    }

    #[test]
    fn overlap_test() {
        let r = DayRange { start: 140, end: 160 };
        assert!(r.overlaps(150, 250));
        assert!(!r.overlaps(161, 250));
        assert_eq!(r.len(), 21);
    }
}
