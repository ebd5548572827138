//! Parsing and merging of per-district daily weather CSV exports.
//!
//! Input files follow the satellite data service's point export layout: an
//! optional free-text metadata block closed by a line containing
//! `-END HEADER-`, then a comma-separated column-header row and one row per
//! day. A plain CSV (header row first) is accepted as well, which is also the
//! layout of the canonical cleaned dataset written by [`write_dataset_csv`].

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::Write;
use std::path::Path;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The eleven weather parameters, in canonical column order.
pub const WEATHER_PARAMETERS: [&str; 11] = [
    "ALLSKY_SFC_SW_DWN",
    "T2M",
    "T2MDEW",
    "TS",
    "QV2M",
    "RH2M",
    "PS",
    "WS2M",
    "GWETTOP",
    "GWETROOT",
    "GWETPROF",
];

/// Location and calendar identifiers, in canonical column order.
pub const IDENTIFIER_COLUMNS: [&str; 4] = ["LAT", "LON", "YEAR", "DOY"];

pub const DISTRICT_COLUMN: &str = "DISTRICT";

pub const DEFAULT_FILL_VALUE: f64 = -999.0;
pub const YEAR_WINDOW: (i32, i32) = (2012, 2024);
pub const LAT_BOUNDS: (f64, f64) = (20.5, 26.7);
pub const LON_BOUNDS: (f64, f64) = (88.0, 92.7);

const N_COLUMNS: usize = 15;

fn canonical_columns() -> impl Iterator<Item = &'static str> {
    IDENTIFIER_COLUMNS.iter().chain(WEATHER_PARAMETERS.iter()).copied()
}

/// One district-day observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeatherRecord {
    pub latitude: f64,
    pub longitude: f64,
    pub year: i32,
    pub doy: u16,
    /// Shortwave irradiance, MJ/m²/day.
    pub allsky_sfc_sw_dwn: f64,
    /// °C
    pub t2m: f64,
    /// °C
    pub t2mdew: f64,
    /// °C
    pub ts: f64,
    /// g/kg
    pub qv2m: f64,
    /// %
    pub rh2m: f64,
    /// kPa
    pub ps: f64,
    /// m/s
    pub ws2m: f64,
    pub gwettop: f64,
    pub gwetroot: f64,
    pub gwetprof: f64,
}

impl WeatherRecord {
    /// Weather parameters in [`WEATHER_PARAMETERS`] order.
    pub fn weather(&self) -> [f64; 11] {
        [
            self.allsky_sfc_sw_dwn,
            self.t2m,
            self.t2mdew,
            self.ts,
            self.qv2m,
            self.rh2m,
            self.ps,
            self.ws2m,
            self.gwettop,
            self.gwetroot,
            self.gwetprof,
        ]
    }

    pub fn identifiers(&self) -> [f64; 4] {
        [
            self.latitude,
            self.longitude,
            f64::from(self.year),
            f64::from(self.doy),
        ]
    }

    /// Looks up a column by its acronym (identifiers included).
    pub fn value(&self, column: &str) -> Option<f64> {
        if let Some(i) = IDENTIFIER_COLUMNS.iter().position(|c| *c == column) {
            return Some(self.identifiers()[i]);
        }
        WEATHER_PARAMETERS
            .iter()
            .position(|c| *c == column)
            .map(|i| self.weather()[i])
    }

    pub fn key(&self) -> RecordKey {
        RecordKey {
            latitude: self.latitude,
            longitude: self.longitude,
            year: self.year,
            doy: self.doy,
        }
    }

    pub(crate) fn from_values(v: &[f64; N_COLUMNS]) -> std::result::Result<Self, String> {
        let year = v[2];
        if year.fract() != 0.0 || year.abs() > 1e6 {
            return Err(format!("YEAR {year} is not an integer year"));
        }
        let doy = v[3];
        if doy.fract() != 0.0 || !(1.0..=366.0).contains(&doy) {
            return Err(format!("DOY {doy} outside 1..=366"));
        }
        Ok(WeatherRecord {
            latitude: v[0],
            longitude: v[1],
            year: year as i32,
            doy: doy as u16,
            allsky_sfc_sw_dwn: v[4],
            t2m: v[5],
            t2mdew: v[6],
            ts: v[7],
            qv2m: v[8],
            rh2m: v[9],
            ps: v[10],
            ws2m: v[11],
            gwettop: v[12],
            gwetroot: v[13],
            gwetprof: v[14],
        })
    }

    /// Hard invariants every stored record satisfies. Returns the first
    /// violation found.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for (name, v) in canonical_columns().zip(
            self.identifiers()
                .iter()
                .chain(self.weather().iter())
                .copied(),
        ) {
            if !v.is_finite() {
                return Err(format!("{name} is not finite"));
            }
        }
        if !(1..=366).contains(&self.doy) {
            return Err(format!("DOY {} outside 1..=366", self.doy));
        }
        if self.doy == 366 && !is_leap_year(self.year) {
            return Err(format!("DOY 366 in non-leap year {}", self.year));
        }
        if !(0.0..=100.0).contains(&self.rh2m) {
            return Err(format!("RH2M {} outside [0, 100]", self.rh2m));
        }
        for (name, v) in [
            ("GWETTOP", self.gwettop),
            ("GWETROOT", self.gwetroot),
            ("GWETPROF", self.gwetprof),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name} {v} outside [0, 1]"));
            }
        }
        Ok(())
    }

    /// Soft checks: the study window and the country bounding box.
    pub fn check_range(&self) -> std::result::Result<(), String> {
        if !(YEAR_WINDOW.0..=YEAR_WINDOW.1).contains(&self.year) {
            return Err(format!(
                "year {} outside {}..={}",
                self.year, YEAR_WINDOW.0, YEAR_WINDOW.1
            ));
        }
        if !(LAT_BOUNDS.0..=LAT_BOUNDS.1).contains(&self.latitude)
            || !(LON_BOUNDS.0..=LON_BOUNDS.1).contains(&self.longitude)
        {
            return Err(format!(
                "location ({}, {}) outside the bounding box",
                self.latitude, self.longitude
            ));
        }
        Ok(())
    }
}

pub fn is_leap_year(year: i32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

pub fn days_in_year(year: i32) -> u16 {
    if is_leap_year(year) {
        366
    } else {
        365
    }
}

/// Sort key (latitude, longitude, year, doy).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordKey {
    pub latitude: f64,
    pub longitude: f64,
    pub year: i32,
    pub doy: u16,
}

impl Eq for RecordKey {}

impl Ord for RecordKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.latitude
            .total_cmp(&other.latitude)
            .then(self.longitude.total_cmp(&other.longitude))
            .then(self.year.cmp(&other.year))
            .then(self.doy.cmp(&other.doy))
    }
}

impl PartialOrd for RecordKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for RecordKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(lat {}, lon {}, year {}, doy {})",
            self.latitude, self.longitude, self.year, self.doy
        )
    }
}

/// Cleaned, merged and ordered observations from all districts.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<WeatherRecord>,
    labels: Vec<String>,
    label_index: Vec<u32>,
    district_count: usize,
}

impl Dataset {
    pub fn records(&self) -> &[WeatherRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Number of distinct (latitude, longitude) pairs.
    pub fn district_count(&self) -> usize {
        self.district_count
    }

    /// District identifier of record `i`.
    pub fn source_label(&self, i: usize) -> &str {
        &self.labels[self.label_index[i] as usize]
    }

    /// Distinct district identifiers, sorted.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Per-record index into [`Dataset::labels`].
    pub fn label_indices(&self) -> &[u32] {
        &self.label_index
    }

    /// Column of one parameter across all records.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        if !canonical_columns().any(|c| c == name) {
            return None;
        }
        Some(
            self.records
                .iter()
                .map(|r| r.value(name).expect("known column"))
                .collect(),
        )
    }

    /// Builds a dataset from records with their district labels, applying the
    /// same ordering and duplicate rules as [`merge_and_clean`].
    pub fn from_records(rows: Vec<(String, WeatherRecord)>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput("no records".into()));
        }
        let mut rows = rows;
        rows.sort_by_key(|r| r.1.key());
        for pair in rows.windows(2) {
            if pair[0].1.key() == pair[1].1.key() {
                return Err(Error::Conflict(pair[0].1.key().to_string()));
            }
        }
        let labels: Vec<String> = rows
            .iter()
            .map(|(l, _)| l.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let lookup: HashMap<&str, u32> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i as u32))
            .collect();
        let label_index = rows.iter().map(|(l, _)| lookup[l.as_str()]).collect();
        let district_count = rows
            .iter()
            .map(|(_, r)| (r.latitude.to_bits(), r.longitude.to_bits()))
            .collect::<BTreeSet<_>>()
            .len();
        let records = rows.into_iter().map(|(_, r)| r).collect();
        Ok(Dataset {
            records,
            labels,
            label_index,
            district_count,
        })
    }
}

/// One parsed data row before cleaning. Cells holding the fill value, empty
/// strings or NaN tokens are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRow {
    /// 1-based line number in the source file.
    pub line: usize,
    pub label: u32,
    /// Values in `LAT, LON, YEAR, DOY, <weather parameters>` order.
    pub values: [Option<f64>; N_COLUMNS],
}

impl RawRow {
    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }
}

/// Rows parsed from one input file.
#[derive(Debug, Clone, PartialEq)]
pub struct DistrictPart {
    pub source: String,
    pub labels: Vec<String>,
    pub rows: Vec<RawRow>,
    pub ignored_columns: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParseOptions {
    pub fill_value: f64,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            fill_value: DEFAULT_FILL_VALUE,
        }
    }
}

/// Parses one export file. The district label is the `DISTRICT` column when
/// present, the file stem otherwise.
pub fn parse_power_csv(path: &Path, options: &ParseOptions) -> Result<DistrictPart> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "district".to_string());
    parse_power_str(&text, &path.display().to_string(), &stem, options)
}

/// Parses export text. `source` names the input in error messages and
/// `default_label` is used when there is no `DISTRICT` column.
pub fn parse_power_str(
    text: &str,
    source: &str,
    default_label: &str,
    options: &ParseOptions,
) -> Result<DistrictPart> {
    let (header_lines, body, body_offset) = split_header(text);
    let header_location = header_lines.and_then(location_from_header);

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(body.as_bytes());
    let headers: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_ascii_uppercase())
        .collect();

    // Column index per canonical slot; LAT/LON may come from the header block.
    let mut slots: [Option<usize>; N_COLUMNS] = [None; N_COLUMNS];
    for (slot, name) in canonical_columns().enumerate() {
        slots[slot] = headers.iter().position(|h| h == name);
    }
    for (slot, name) in canonical_columns().enumerate() {
        let from_header = slot < 2 && header_location.is_some();
        if slots[slot].is_none() && !from_header {
            return Err(Error::Schema {
                path: source.to_string(),
                column: name.to_string(),
            });
        }
    }
    let district_col = headers.iter().position(|h| h == DISTRICT_COLUMN);
    let ignored_columns: Vec<String> = headers
        .iter()
        .filter(|h| h.as_str() != DISTRICT_COLUMN && !canonical_columns().any(|c| c == h.as_str()))
        .cloned()
        .collect();
    if !ignored_columns.is_empty() {
        warn!("{source}: ignoring columns {}", ignored_columns.join(", "));
    }

    let mut labels: Vec<String> = Vec::new();
    let mut label_lookup: HashMap<String, u32> = HashMap::new();
    let mut intern = |label: &str| -> u32 {
        if let Some(i) = label_lookup.get(label) {
            return *i;
        }
        let i = labels.len() as u32;
        labels.push(label.to_string());
        label_lookup.insert(label.to_string(), i);
        i
    };
    let default_id = if district_col.is_none() {
        Some(intern(default_label))
    } else {
        None
    };

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        // +1 for the header row, +1 for 1-based numbering.
        let line = body_offset + i + 2;
        if record.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        let mut values = [None; N_COLUMNS];
        for (slot, name) in canonical_columns().enumerate() {
            values[slot] = match slots[slot] {
                Some(col) => {
                    let cell = record.get(col).unwrap_or("");
                    parse_cell(cell, options.fill_value).map_err(|_| Error::Parse {
                        path: source.to_string(),
                        row: line,
                        column: name.to_string(),
                        value: cell.to_string(),
                    })?
                }
                None => header_location.map(|(lat, lon)| if slot == 0 { lat } else { lon }),
            };
        }
        let label = match (district_col, default_id) {
            (Some(col), _) => {
                let cell = record.get(col).unwrap_or("").trim();
                intern(if cell.is_empty() { default_label } else { cell })
            }
            (None, Some(id)) => id,
            (None, None) => unreachable!(),
        };
        rows.push(RawRow {
            line,
            label,
            values,
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput(format!("{source}: no data rows")));
    }
    Ok(DistrictPart {
        source: source.to_string(),
        labels,
        rows,
        ignored_columns,
    })
}

/// Splits off the metadata block. Returns (header lines, body, number of
/// lines preceding the body).
fn split_header(text: &str) -> (Option<Vec<&str>>, &str, usize) {
    let mut offset = 0;
    let mut consumed = 0;
    for line in text.split_inclusive('\n') {
        offset += line.len();
        consumed += 1;
        if line.contains("-END HEADER-") {
            let header: Vec<&str> = text[..offset].lines().collect();
            return (Some(header), &text[offset..], consumed);
        }
    }
    (None, text, 0)
}

/// Reads `Latitude <x> ... Longitude <y>` from a metadata line.
fn location_from_header(lines: Vec<&str>) -> Option<(f64, f64)> {
    let number_after = |line: &str, word: &str| -> Option<f64> {
        let lower = line.to_ascii_lowercase();
        let at = lower.find(word)? + word.len();
        line[at..]
            .split(|c: char| c.is_whitespace() || c == ':' || c == ',')
            .find(|t| !t.is_empty())
            .and_then(|t| t.parse().ok())
    };
    lines.iter().find_map(|line| {
        let lat = number_after(line, "latitude")?;
        let lon = number_after(line, "longitude")?;
        Some((lat, lon))
    })
}

fn parse_cell(cell: &str, fill_value: f64) -> std::result::Result<Option<f64>, ()> {
    let cell = cell.trim();
    if cell.is_empty()
        || ["nan", "na", "null", "none"]
            .iter()
            .any(|t| cell.eq_ignore_ascii_case(t))
    {
        return Ok(None);
    }
    let v: f64 = cell.parse().map_err(|_| ())?;
    if v.is_nan() || (v - fill_value).abs() <= 1e-9 * fill_value.abs().max(1.0) {
        return Ok(None);
    }
    Ok(Some(v))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CleanOptions {
    /// Turn invariant and range violations into errors instead of warnings.
    pub strict: bool,
}

/// Row accounting from [`merge_and_clean`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanReport {
    pub rows_in: usize,
    pub dropped_missing: usize,
    pub dropped_invalid: usize,
    pub rows_out: usize,
    /// Kept rows outside the year window or bounding box.
    pub out_of_range: usize,
}

impl CleanReport {
    pub fn dropped(&self) -> usize {
        self.dropped_missing + self.dropped_invalid
    }
}

/// Drops incomplete and invalid rows, sorts by (lat, lon, year, doy) and
/// rejects duplicate keys.
pub fn merge_and_clean(
    parts: &[DistrictPart],
    options: &CleanOptions,
) -> Result<(Dataset, CleanReport)> {
    let mut report = CleanReport::default();
    let mut rows = Vec::new();
    for part in parts {
        for row in &part.rows {
            report.rows_in += 1;
            if !row.is_complete() {
                report.dropped_missing += 1;
                continue;
            }
            let values = row.values.map(|v| v.expect("complete row"));
            let record = WeatherRecord::from_values(&values)
                .and_then(|r| r.check_invariants().map(|_| r));
            let record = match record {
                Ok(r) => r,
                Err(msg) => {
                    let msg = format!("{}, row {}: {msg}", part.source, row.line);
                    if options.strict {
                        return Err(Error::Range(msg));
                    }
                    if report.dropped_invalid < 10 {
                        warn!("dropping invalid row: {msg}");
                    }
                    report.dropped_invalid += 1;
                    continue;
                }
            };
            if let Err(msg) = record.check_range() {
                let msg = format!("{}, row {}: {msg}", part.source, row.line);
                if options.strict {
                    return Err(Error::Range(msg));
                }
                if report.out_of_range < 10 {
                    warn!("{msg}");
                }
                report.out_of_range += 1;
            }
            rows.push((part.labels[row.label as usize].clone(), record));
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput(format!(
            "no rows survived cleaning ({} read, {} dropped)",
            report.rows_in,
            report.dropped()
        )));
    }
    let dataset = Dataset::from_records(rows)?;
    report.rows_out = dataset.len();
    Ok((dataset, report))
}

/// Parses every file (concurrently) and merges them. Parse errors are
/// reported for the first failing file in input order.
pub fn load_dataset<P: AsRef<Path> + Sync>(
    paths: &[P],
    parse: &ParseOptions,
    clean: &CleanOptions,
) -> Result<(Dataset, CleanReport)> {
    if paths.is_empty() {
        return Err(Error::EmptyInput("no input files".into()));
    }
    let parts = paths
        .par_iter()
        .map(|p| parse_power_csv(p.as_ref(), parse))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    merge_and_clean(&parts, clean)
}

/// Writes the canonical cleaned dataset: `DISTRICT`, the identifiers and the
/// weather parameters, one row per record in dataset order.
pub fn write_dataset<W: Write>(dataset: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![DISTRICT_COLUMN];
    header.extend(canonical_columns());
    w.write_record(&header)?;
    let mut row: Vec<String> = Vec::with_capacity(N_COLUMNS + 1);
    for (i, r) in dataset.records.iter().enumerate() {
        row.clear();
        row.push(dataset.source_label(i).to_string());
        row.push(r.latitude.to_string());
        row.push(r.longitude.to_string());
        row.push(r.year.to_string());
        row.push(r.doy.to_string());
        row.extend(r.weather().iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<dataset writer>", e))?;
    Ok(())
}

pub fn write_dataset_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset(dataset, std::io::BufWriter::new(file))
}

/// Reads a canonical dataset file back. Strict validation is not applied,
/// the file already passed cleaning when it was written.
pub fn read_dataset_csv(path: &Path) -> Result<Dataset> {
    let part = parse_power_csv(path, &ParseOptions::default())?;
    let (dataset, _) = merge_and_clean(&[part], &CleanOptions::default())?;
    Ok(dataset)
}
