//! Gaussian kernel density estimates on 1-D and 2-D grids.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::variance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridAxis {
    DayOfYear,
    LatLon,
}

/// One density surface over the grid of its parent [`DensityGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySeries {
    pub cluster: usize,
    pub n_samples: usize,
    /// One bandwidth per axis.
    pub bandwidths: Vec<f64>,
    /// 1-D: one value per `x`. 2-D: row-major, `values[i * y.len() + j]` at `(x[i], y[j])`.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub axis: GridAxis,
    /// Day of year, or latitude for 2-D grids.
    pub x: Vec<f64>,
    /// Longitude for 2-D grids; empty for 1-D.
    pub y: Vec<f64>,
    pub series: Vec<DensitySeries>,
}

impl DensityGrid {
    pub fn series_for(&self, cluster: usize) -> Option<&DensitySeries> {
        self.series.iter().find(|s| s.cluster == cluster)
    }

    /// Trapezoid-rule integral of one series over the grid.
    pub fn integral(&self, series: &DensitySeries) -> f64 {
        match self.axis {
            GridAxis::DayOfYear => trapezoid(&self.x, &series.values),
            GridAxis::LatLon => {
                let ny = self.y.len();
                let rows: Vec<f64> = (0..self.x.len())
                    .map(|i| trapezoid(&self.y, &series.values[i * ny..(i + 1) * ny]))
                    .collect();
                trapezoid(&self.x, &rows)
            }
        }
    }

    /// One row per grid point, one column per cluster.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = match self.axis {
            GridAxis::DayOfYear => vec!["doy".into()],
            GridAxis::LatLon => vec!["lat".into(), "lon".into()],
        };
        header.extend(self.series.iter().map(|s| format!("cluster_{}", s.cluster)));
        w.write_record(&header)?;
        let ny = self.y.len().max(1);
        for i in 0..self.x.len() {
            for j in 0..ny {
                let mut rec = vec![self.x[i].to_string()];
                if self.axis == GridAxis::LatLon {
                    rec.push(self.y[j].to_string());
                }
                let at = if self.axis == GridAxis::LatLon { i * ny + j } else { i };
                rec.extend(self.series.iter().map(|s| s.values[at].to_string()));
                w.write_record(&rec)?;
            }
        }
        w.flush().map_err(|e| Error::io("density grid", e))?;
        Ok(())
    }
}

pub(crate) fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1]))
        .sum()
}

/// Scott's rule `σ̂ · n^(−1/(d+4))` with the sample standard deviation.
pub fn scott_bandwidth(samples: &[f64], dims: usize) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "bandwidth rule needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    let sd = variance(samples, 1).sqrt();
    let h = sd * (samples.len() as f64).powf(-1.0 / (dims as f64 + 4.0));
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InsufficientData(
            "samples have zero spread; pass an explicit bandwidth".into(),
        ));
    }
    Ok(h)
}

fn check_bandwidth(h: f64) -> Result<f64> {
    if h > 0.0 && h.is_finite() {
        Ok(h)
    } else {
        Err(Error::InvalidParameter(format!("bandwidth must be positive, got {h}")))
    }
}

/// Distinct sample values with multiplicities, in ascending order. Daily
/// and per-district data repeat values heavily, so kernels are summed per
/// distinct value.
fn tally<K: Ord + Copy>(keys: impl Iterator<Item = K>) -> Vec<(K, f64)> {
    let mut m: BTreeMap<K, usize> = BTreeMap::new();
    for k in keys {
        *m.entry(k).or_default() += 1;
    }
    m.into_iter().map(|(k, c)| (k, c as f64)).collect()
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Bits(u64);

impl Bits {
    fn of(v: f64) -> Self {
        // Order-preserving map of finite floats onto integers.
        let b = v.to_bits();
        Bits(if b >> 63 == 1 { !b } else { b | (1 << 63) })
    }
    fn value(self) -> f64 {
        let b = self.0;
        f64::from_bits(if b >> 63 == 1 { b & !(1 << 63) } else { !b })
    }
}

fn ensure_finite(samples: impl IntoIterator<Item = f64>) -> Result<()> {
    if samples.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(Error::NonFinite("KDE samples".into()))
    }
}

fn eval_1d(points: &[(f64, f64)], n: f64, h: f64, grid: &[f64]) -> Vec<f64> {
    let norm = 1.0 / (n * h * (2.0 * PI).sqrt());
    grid.par_iter()
        .map(|&g| {
            let mut s = 0.0;
            for &(x, w) in points {
                let u = (g - x) / h;
                s += w * (-0.5 * u * u).exp();
            }
            s * norm
        })
        .collect()
}

/// Gaussian KDE of `samples` at each grid point. The bandwidth defaults to
/// Scott's rule `σ̂ · n^(−1/5)`.
pub fn kde_1d(samples: &[f64], grid: &[f64], bandwidth: Option<f64>) -> Result<DensityGrid> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("no KDE samples".into()));
    }
    ensure_finite(samples.iter().copied())?;
    let h = match bandwidth {
        Some(h) => check_bandwidth(h)?,
        None => scott_bandwidth(samples, 1)?,
    };
    let points: Vec<(f64, f64)> = tally(samples.iter().map(|&v| Bits::of(v)))
        .into_iter()
        .map(|(b, w)| (b.value(), w))
        .collect();
    let values = eval_1d(&points, samples.len() as f64, h, grid);
    Ok(DensityGrid {
        axis: GridAxis::DayOfYear,
        x: grid.to_vec(),
        y: Vec::new(),
        series: vec![DensitySeries {
            cluster: 0,
            n_samples: samples.len(),
            bandwidths: vec![h],
            values,
        }],
    })
}

/// Product-Gaussian KDE of `(lat, lon)` samples on the lattice
/// `lat_grid × lon_grid`. Bandwidths default to Scott's rule per axis,
/// `σ̂_d · n^(−1/6)`.
pub fn kde_2d(
    samples: &[(f64, f64)],
    lat_grid: &[f64],
    lon_grid: &[f64],
    bandwidths: Option<(f64, f64)>,
) -> Result<DensityGrid> {
    let series = kde_2d_series(samples, lat_grid, lon_grid, bandwidths, 0)?;
    Ok(DensityGrid {
        axis: GridAxis::LatLon,
        x: lat_grid.to_vec(),
        y: lon_grid.to_vec(),
        series: vec![series],
    })
}

pub(crate) fn kde_2d_series(
    samples: &[(f64, f64)],
    lat_grid: &[f64],
    lon_grid: &[f64],
    bandwidths: Option<(f64, f64)>,
    cluster: usize,
) -> Result<DensitySeries> {
    if samples.len() < 2 && bandwidths.is_none() {
        return Err(Error::InsufficientData(format!(
            "2-D bandwidth rule needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    if samples.is_empty() {
        return Err(Error::EmptyInput("no KDE samples".into()));
    }
    ensure_finite(samples.iter().flat_map(|&(a, b)| [a, b]))?;
    let (h_lat, h_lon) = match bandwidths {
        Some((a, b)) => (check_bandwidth(a)?, check_bandwidth(b)?),
        None => {
            let lat: Vec<f64> = samples.iter().map(|s| s.0).collect();
            let lon: Vec<f64> = samples.iter().map(|s| s.1).collect();
            (scott_bandwidth(&lat, 2)?, scott_bandwidth(&lon, 2)?)
        }
    };
    let points = tally(samples.iter().map(|&(a, b)| (Bits::of(a), Bits::of(b))));
    let n = samples.len() as f64;
    let norm = 1.0 / (n * 2.0 * PI * h_lat * h_lon);
    let ny = lon_grid.len();
    // Separable kernel: tabulate each axis once per distinct point.
    let lon_k: Vec<Vec<f64>> = points
        .iter()
        .map(|((_, b), _)| {
            let y = b.value();
            lon_grid
                .iter()
                .map(|&g| (-0.5 * ((g - y) / h_lon).powi(2)).exp())
                .collect()
        })
        .collect();
    let rows: Vec<Vec<f64>> = lat_grid
        .par_iter()
        .map(|&g| {
            let mut row = vec![0.0; ny];
            for (((a, _), w), ky) in points.iter().zip(&lon_k) {
                let kx = w * (-0.5 * ((g - a.value()) / h_lat).powi(2)).exp();
                for (r, k) in row.iter_mut().zip(ky) {
                    *r += kx * k;
                }
            }
            row.iter_mut().for_each(|r| *r *= norm);
            row
        })
        .collect();
    Ok(DensitySeries {
        cluster,
        n_samples: samples.len(),
        bandwidths: vec![h_lat, h_lon],
        values: rows.concat(),
    })
}

/// Evenly spaced points from `start` to `end` inclusive (the last point is
/// clipped to `end`).
pub fn linear_grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if step.is_nan() || step <= 0.0 || end.is_nan() || start.is_nan() || end < start {
        return Err(Error::InvalidParameter(format!(
            "grid needs step > 0 and end >= start, got [{start}, {end}] step {step}"
        )));
    }
    let n = ((end - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| (start + i as f64 * step).min(end)).collect())
}
