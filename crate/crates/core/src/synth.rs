//! Seeded synthetic district-day weather with known regime structure.
//!
//! Every day of the year belongs to exactly one regime. A record's weather
//! parameters are drawn independently from the owning regime's Gaussians,
//! shifted by a small per-district offset and clamped to physical ranges.
//! The generating regime is kept as ground truth for recovery checks.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{days_in_year, Dataset, WeatherRecord, IDENTIFIER_COLUMNS, WEATHER_PARAMETERS};
use crate::seeding::{derive_seed, stream_rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamModel {
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeSpec {
    pub name: String,
    /// Inclusive day-of-year intervals owned by this regime.
    pub day_ranges: Vec<(u16, u16)>,
    /// Keyed by parameter acronym; all eleven weather parameters required.
    pub params: BTreeMap<String, ParamModel>,
    /// Intended GWETTOP band, informational.
    pub moisture_band: (f64, f64),
}

impl RegimeSpec {
    pub fn covers(&self, doy: u16) -> bool {
        self.day_ranges.iter().any(|&(a, b)| a <= doy && doy <= b)
    }
}

fn regime(name: &str, days: &[(u16, u16)], band: (f64, f64), params: [(f64, f64); 11]) -> RegimeSpec {
    RegimeSpec {
        name: name.to_string(),
        day_ranges: days.to_vec(),
        params: WEATHER_PARAMETERS
            .iter()
            .zip(params)
            .map(|(p, (mean, sd))| (p.to_string(), ParamModel { mean, sd }))
            .collect(),
        moisture_band: band,
    }
}

/// Wet monsoon, cool dry winter and hot transitional regimes. Parameter
/// order follows [`WEATHER_PARAMETERS`].
pub fn default_regimes() -> Vec<RegimeSpec> {
    vec![
        regime(
            "monsoon",
            &[(150, 250)],
            (0.8, 0.9),
            [
                (15.0, 0.6),
                (29.0, 0.35),
                (25.0, 0.35),
                (29.5, 0.4),
                (20.0, 0.4),
                (86.0, 1.2),
                (99.8, 0.1),
                (2.6, 0.15),
                (0.85, 0.012),
                (0.88, 0.01),
                (0.86, 0.01),
            ],
        ),
        regime(
            "winter",
            &[(1, 50), (251, 366)],
            (0.6, 0.7),
            [
                (14.0, 0.6),
                (19.5, 0.35),
                (12.0, 0.35),
                (19.5, 0.4),
                (9.0, 0.4),
                (66.0, 1.2),
                (101.5, 0.1),
                (1.2, 0.15),
                (0.65, 0.012),
                (0.70, 0.01),
                (0.68, 0.01),
            ],
        ),
        regime(
            "transitional",
            &[(51, 149)],
            (0.4, 0.5),
            [
                (21.5, 0.6),
                (27.0, 0.35),
                (17.0, 0.35),
                (29.0, 0.4),
                (12.5, 0.4),
                (56.0, 1.2),
                (100.7, 0.1),
                (3.4, 0.15),
                (0.45, 0.012),
                (0.52, 0.01),
                (0.50, 0.01),
            ],
        ),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistrictSite {
    pub name: String,
    pub latitude: f64,
    pub longitude: f64,
}

const SITES: [(&str, f64, f64); 38] = [
    ("dhaka", 23.81, 90.41),
    ("chattogram", 22.36, 91.78),
    ("khulna", 22.85, 89.54),
    ("rajshahi", 24.37, 88.60),
    ("sylhet", 24.89, 91.87),
    ("barishal", 22.70, 90.37),
    ("rangpur", 25.74, 89.28),
    ("mymensingh", 24.75, 90.41),
    ("cumilla", 23.46, 91.18),
    ("bogura", 24.85, 89.37),
    ("dinajpur", 25.63, 88.64),
    ("jashore", 23.17, 89.21),
    ("kushtia", 23.90, 89.12),
    ("noakhali", 22.87, 91.10),
    ("pabna", 24.01, 89.24),
    ("tangail", 24.25, 89.92),
    ("faridpur", 23.61, 89.84),
    ("coxs_bazar", 21.43, 92.01),
    ("patuakhali", 22.36, 90.33),
    ("satkhira", 22.72, 89.07),
    ("jamalpur", 24.94, 89.94),
    ("sirajganj", 24.45, 89.70),
    ("naogaon", 24.80, 88.94),
    ("thakurgaon", 26.03, 88.46),
    ("kurigram", 25.81, 89.64),
    ("nilphamari", 25.93, 88.86),
    ("moulvibazar", 24.48, 91.77),
    ("habiganj", 24.37, 91.42),
    ("sunamganj", 25.07, 91.40),
    ("netrokona", 24.87, 90.73),
    ("kishoreganj", 24.44, 90.78),
    ("narsingdi", 23.92, 90.72),
    ("gazipur", 24.00, 90.42),
    ("feni", 23.02, 91.40),
    ("bhola", 22.69, 90.65),
    ("bagerhat", 22.65, 89.79),
    ("chapai_nawabganj", 24.60, 88.27),
    ("rangamati", 22.65, 92.17),
];

/// The first `n` of 38 built-in district locations.
pub fn default_sites(n: usize) -> Result<Vec<DistrictSite>> {
    if n == 0 || n > SITES.len() {
        return Err(Error::Config(format!(
            "district count must be in 1..={}, got {n}",
            SITES.len()
        )));
    }
    Ok(SITES[..n]
        .iter()
        .map(|&(name, latitude, longitude)| DistrictSite {
            name: name.to_string(),
            latitude,
            longitude,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// 5 districts × 2012–2013, about 3,650 rows.
    Ci,
    /// 38 districts × 2012 to mid-2024, about 173,000 rows.
    Paper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub districts: usize,
    pub start_year: i32,
    pub end_year: i32,
    /// Last day generated in `end_year`; the whole year when absent.
    pub end_doy: Option<u16>,
    /// Per-district offset sd, as a fraction of each parameter's sd.
    pub district_offset: f64,
    pub regimes: Vec<RegimeSpec>,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec::preset(Preset::Ci)
    }
}

impl SynthSpec {
    pub fn preset(preset: Preset) -> Self {
        let base = SynthSpec {
            districts: 5,
            start_year: 2012,
            end_year: 2013,
            end_doy: None,
            district_offset: 0.25,
            regimes: default_regimes(),
        };
        match preset {
            Preset::Ci => base,
            Preset::Paper => SynthSpec {
                districts: 38,
                end_year: 2024,
                end_doy: Some(182),
                ..base
            },
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Checks year bounds, parameter coverage and that regimes partition the
    /// calendar: no overlaps and every day 1..=365 owned.
    pub fn validate(&self) -> Result<()> {
        if self.end_year < self.start_year {
            return Err(Error::Config(format!(
                "end_year {} precedes start_year {}",
                self.end_year, self.start_year
            )));
        }
        if let Some(d) = self.end_doy {
            if d == 0 || d > days_in_year(self.end_year) {
                return Err(Error::Config(format!("end_doy {d} is not a day of {}", self.end_year)));
            }
        }
        if !(self.district_offset >= 0.0 && self.district_offset.is_finite()) {
            return Err(Error::Config("district_offset must be non-negative".into()));
        }
        if self.regimes.is_empty() {
            return Err(Error::Config("at least one regime is required".into()));
        }
        for r in &self.regimes {
            for &(a, b) in &r.day_ranges {
                if a == 0 || b > 366 || a > b {
                    return Err(Error::Config(format!(
                        "regime {}: day range [{a}, {b}] is not within [1, 366]",
                        r.name
                    )));
                }
            }
            for p in WEATHER_PARAMETERS {
                match r.params.get(p) {
                    None => {
                        return Err(Error::Config(format!("regime {}: missing parameter {p}", r.name)))
                    }
                    Some(m) if !(m.sd >= 0.0 && m.mean.is_finite() && m.sd.is_finite()) => {
                        return Err(Error::Config(format!("regime {}: bad model for {p}", r.name)))
                    }
                    _ => {}
                }
            }
        }
        for doy in 1..=366u16 {
            let owners: Vec<&str> = self
                .regimes
                .iter()
                .filter(|r| r.covers(doy))
                .map(|r| r.name.as_str())
                .collect();
            if owners.len() > 1 {
                return Err(Error::Config(format!(
                    "regimes {} overlap on day {doy}",
                    owners.join(" and ")
                )));
            }
            if owners.is_empty() && doy <= 365 {
                return Err(Error::Config(format!("no regime covers day {doy}")));
            }
        }
        Ok(())
    }

    /// Regime index owning `doy`. An uncovered day 366 falls to day 365's
    /// owner.
    pub fn regime_of(&self, doy: u16) -> Option<usize> {
        self.regimes
            .iter()
            .position(|r| r.covers(doy))
            .or_else(|| (doy == 366).then(|| self.regime_of(365)).flatten())
    }
}

/// A generated dataset with ground-truth regime tags aligned to its rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub dataset: Dataset,
    /// Index into `regime_names` per dataset row.
    pub regimes: Vec<usize>,
    pub regime_names: Vec<String>,
    pub sites: Vec<DistrictSite>,
}

fn clamp_param(name: &str, v: f64) -> f64 {
    match name {
        "RH2M" => v.clamp(0.0, 100.0),
        "GWETTOP" | "GWETROOT" | "GWETPROF" => v.clamp(0.0, 1.0),
        "ALLSKY_SFC_SW_DWN" | "QV2M" | "WS2M" | "PS" => v.max(0.0),
        _ => v,
    }
}

pub fn generate(spec: &SynthSpec, seed: u64) -> Result<SyntheticData> {
    spec.validate()?;
    let sites = default_sites(spec.districts)?;
    let base = derive_seed(seed, "synth");
    let per_site: Vec<Vec<(String, WeatherRecord, usize)>> = sites
        .par_iter()
        .enumerate()
        .map(|(s, site)| {
            let mut rng = stream_rng(base, s as u64);
            // Offsets first so they do not depend on the calendar span.
            let mut offsets = vec![[0.0; 11]; spec.regimes.len()];
            for (r, regime) in spec.regimes.iter().enumerate() {
                for (j, p) in WEATHER_PARAMETERS.iter().enumerate() {
                    let sd = regime.params[*p].sd * spec.district_offset;
                    offsets[r][j] = if sd > 0.0 {
                        Normal::new(0.0, sd).expect("finite sd").sample(&mut rng)
                    } else {
                        0.0
                    };
                }
            }
            let mut rows = Vec::new();
            for year in spec.start_year..=spec.end_year {
                let last = match spec.end_doy {
                    Some(d) if year == spec.end_year => d,
                    _ => days_in_year(year),
                };
                for doy in 1..=last {
                    let r = spec.regime_of(doy).expect("validated calendar");
                    let regime = &spec.regimes[r];
                    let mut w = [0.0; 11];
                    for (j, p) in WEATHER_PARAMETERS.iter().enumerate() {
                        let m = regime.params[*p];
                        let noise = if m.sd > 0.0 {
                            Normal::new(0.0, m.sd).expect("finite sd").sample(&mut rng)
                        } else {
                            0.0
                        };
                        w[j] = clamp_param(p, m.mean + offsets[r][j] + noise);
                    }
                    let mut values = [0.0; 15];
                    values[0] = site.latitude;
                    values[1] = site.longitude;
                    values[2] = f64::from(year);
                    values[3] = f64::from(doy);
                    values[4..].copy_from_slice(&w);
                    let record = WeatherRecord::from_values(&values).map_err(Error::Range)?;
                    rows.push((site.name.clone(), record, r));
                }
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<(String, WeatherRecord, usize)> = per_site.into_iter().flatten().collect();
    rows.sort_by_key(|r| r.1.key());
    let regimes = rows.iter().map(|r| r.2).collect();
    let dataset = Dataset::from_records(rows.into_iter().map(|(l, r, _)| (l, r)).collect())?;
    Ok(SyntheticData {
        dataset,
        regimes,
        regime_names: spec.regimes.iter().map(|r| r.name.clone()).collect(),
        sites,
    })
}

/// Writes one export-format file per district (metadata block, column
/// header, daily rows) and returns the paths in district order.
pub fn write_district_csvs(data: &SyntheticData, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let records = data.dataset.records();
    let mut paths = Vec::with_capacity(data.sites.len());
    for site in &data.sites {
        let mut text = String::new();
        let rows: Vec<&WeatherRecord> = records
            .iter()
            .enumerate()
            .filter(|(i, _)| data.dataset.source_label(*i) == site.name)
            .map(|(_, r)| r)
            .collect();
        let (first, last) = match (rows.first(), rows.last()) {
            (Some(a), Some(b)) => (a, b),
            _ => continue,
        };
        let _ = writeln!(text, "-BEGIN HEADER-");
        let _ = writeln!(text, "Synthetic daily point export: {}", site.name);
        let _ = writeln!(
            text,
            "Dates (year/doy): {}/{} through {}/{}",
            first.year, first.doy, last.year, last.doy
        );
        let _ = writeln!(
            text,
            "Location: Latitude  {}   Longitude {}",
            site.latitude, site.longitude
        );
        let _ = writeln!(text, "The value for missing source data: -999");
        let _ = writeln!(text, "-END HEADER-");
        let header: Vec<&str> = IDENTIFIER_COLUMNS.iter().chain(WEATHER_PARAMETERS.iter()).copied().collect();
        let _ = writeln!(text, "{}", header.join(","));
        for r in rows {
            let _ = write!(text, "{},{},{},{}", r.latitude, r.longitude, r.year, r.doy);
            for v in r.weather() {
                let _ = write!(text, ",{v}");
            }
            text.push('\n');
        }
        let path = dir.join(format!("{}.csv", site.name));
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        paths.push(path);
    }
    Ok(paths)
}

/// Writes the regime specification as pretty JSON.
pub fn write_spec_json(spec: &SynthSpec, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(spec)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{load_dataset, CleanOptions, ParseOptions};

    fn small(districts: usize, year: i32) -> SynthSpec {
        SynthSpec {
            districts,
            start_year: year,
            end_year: year,
            ..SynthSpec::default()
        }
    }

    #[test]
    fn record_counts() {
        assert_eq!(generate(&small(2, 2013), 1).unwrap().dataset.len(), 730);
        assert_eq!(generate(&small(1, 2012), 1).unwrap().dataset.len(), 366);
        let ci = generate(&SynthSpec::preset(Preset::Ci), 42).unwrap();
        assert_eq!(ci.dataset.len(), 5 * 731);
        assert_eq!(ci.dataset.district_count(), 5);
    }

    #[test]
    fn deterministic() {
        let a = generate(&small(2, 2013), 9).unwrap();
        let b = generate(&small(2, 2013), 9).unwrap();
        assert_eq!(a, b);
        let c = generate(&small(2, 2013), 10).unwrap();
        assert_ne!(a.dataset, c.dataset);
    }

    #[test]
    fn monsoon_moisture_band() {
        let data = generate(&SynthSpec::preset(Preset::Ci), 42).unwrap();
        let g: Vec<f64> = data
            .dataset
            .records()
            .iter()
            .zip(&data.regimes)
            .filter(|(_, &r)| r == 0)
            .map(|(rec, _)| rec.gwettop)
            .collect();
        let m = crate::stats::median(&g);
        assert!((0.75..=0.95).contains(&m), "median {m}");
    }

    #[test]
    fn overlapping_regimes_rejected() {
        let mut spec = SynthSpec::default();
        spec.regimes[0].day_ranges = vec![(140, 250)];
        match generate(&spec, 1) {
            Err(Error::Config(msg)) => assert!(msg.contains("overlap")),
            other => panic!("unexpected {other:?}"),
        }
        let mut spec = SynthSpec::default();
        spec.regimes[2].day_ranges = vec![(60, 149)];
        assert!(matches!(spec.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn csv_round_trip() {
        let data = generate(&small(3, 2012), 4).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = write_district_csvs(&data, dir.path()).unwrap();
        assert_eq!(paths.len(), 3);
        let (back, report) = load_dataset(&paths, &ParseOptions::default(), &CleanOptions { strict: true }).unwrap();
        assert_eq!(report.dropped(), 0);
        assert_eq!(back, data.dataset);
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = SynthSpec::preset(Preset::Paper);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("spec.json");
        write_spec_json(&spec, &path).unwrap();
        assert_eq!(SynthSpec::from_json_file(&path).unwrap(), spec);
    }
}
