//! Geographic cluster densities and per-district membership shares.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::kde::{kde_2d_series, linear_grid, DensityGrid, GridAxis};
use crate::error::{Error, Result};
use crate::ingest::{Dataset, LAT_BOUNDS, LON_BOUNDS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeoGridSpec {
    pub lat_bounds: (f64, f64),
    pub lon_bounds: (f64, f64),
    pub step: f64,
}

impl Default for GeoGridSpec {
    fn default() -> Self {
        GeoGridSpec {
            lat_bounds: LAT_BOUNDS,
            lon_bounds: LON_BOUNDS,
            step: 0.1,
        }
    }
}

/// Per-cluster 2-D KDE of member locations, each normalized on its own.
pub fn geo_density(
    dataset: &Dataset,
    assignments: &[usize],
    spec: &GeoGridSpec,
    bandwidths: Option<(f64, f64)>,
) -> Result<DensityGrid> {
    if assignments.len() != dataset.len() {
        return Err(Error::DimensionMismatch {
            expected: dataset.len(),
            got: assignments.len(),
        });
    }
    let lat = linear_grid(spec.lat_bounds.0, spec.lat_bounds.1, spec.step)?;
    let lon = linear_grid(spec.lon_bounds.0, spec.lon_bounds.1, spec.step)?;
    let k = assignments.iter().max().map_or(0, |&m| m + 1);
    let mut points: Vec<Vec<(f64, f64)>> = vec![Vec::new(); k];
    for (r, &a) in dataset.records().iter().zip(assignments) {
        points[a].push((r.latitude, r.longitude));
    }
    let series = points
        .iter()
        .enumerate()
        .map(|(c, p)| {
            kde_2d_series(p, &lat, &lon, bandwidths, c)
                .map_err(|e| Error::InsufficientData(format!("geographic density of cluster {c}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityGrid {
        axis: GridAxis::LatLon,
        x: lat,
        y: lon,
        series,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistrictShare {
    pub district: String,
    pub latitude: f64,
    pub longitude: f64,
    pub total: usize,
    pub counts: Vec<usize>,
    pub shares: Vec<f64>,
}

/// Cluster membership counts and fractions per district location, ordered
/// by (latitude, longitude).
pub fn district_shares(dataset: &Dataset, assignments: &[usize]) -> Result<Vec<DistrictShare>> {
    if assignments.len() != dataset.len() {
        return Err(Error::DimensionMismatch {
            expected: dataset.len(),
            got: assignments.len(),
        });
    }
    let k = assignments.iter().max().map_or(0, |&m| m + 1);
    // Records are sorted by location, so the first label seen names the site.
    let mut by_site: BTreeMap<(i64, i64), DistrictShare> = BTreeMap::new();
    for (i, (r, &a)) in dataset.records().iter().zip(assignments).enumerate() {
        let key = (ordered(r.latitude), ordered(r.longitude));
        let entry = by_site.entry(key).or_insert_with(|| DistrictShare {
            district: dataset.source_label(i).to_string(),
            latitude: r.latitude,
            longitude: r.longitude,
            total: 0,
            counts: vec![0; k],
            shares: Vec::new(),
        });
        entry.total += 1;
        entry.counts[a] += 1;
    }
    Ok(by_site
        .into_values()
        .map(|mut d| {
            d.shares = d.counts.iter().map(|&c| c as f64 / d.total as f64).collect();
            d
        })
        .collect())
}

fn ordered(v: f64) -> i64 {
    let b = v.to_bits() as i64;
    if b < 0 {
        b ^ i64::MAX
    } else {
        b
    }
}

pub fn write_district_shares_csv<W: Write>(shares: &[DistrictShare], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let k = shares.first().map_or(0, |s| s.counts.len());
    let mut header: Vec<String> = ["district", "lat", "lon", "total"].map(String::from).to_vec();
    header.extend((0..k).map(|c| format!("count_{c}")));
    header.extend((0..k).map(|c| format!("share_{c}")));
    w.write_record(&header)?;
    for s in shares {
        let mut rec = vec![
            s.district.clone(),
            s.latitude.to_string(),
            s.longitude.to_string(),
            s.total.to_string(),
        ];
        rec.extend(s.counts.iter().map(|c| c.to_string()));
        rec.extend(s.shares.iter().map(|c| c.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("district shares", e))?;
    Ok(())
}
