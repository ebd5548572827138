//! Feature selection, standardization, correlation and the train/test split.

use std::io::Write;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Dataset, IDENTIFIER_COLUMNS, WEATHER_PARAMETERS};
use crate::seeding::stream_rng;

/// Identifies the dataset record a matrix row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RowKey {
    /// Index into [`Dataset::labels`].
    pub district: u32,
    pub year: i32,
    pub doy: u16,
}

/// Mean and standard deviation applied to one column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnScaling {
    pub mean: f64,
    pub std: f64,
}

/// Per-column standardization parameters, kept for inverse transforms and
/// for scaling unseen query rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub feature_names: Vec<String>,
    pub columns: Vec<ColumnScaling>,
}

impl Scaler {
    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.columns.len() {
            return Err(Error::DimensionMismatch {
                expected: self.columns.len(),
                got: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(&self.columns)
            .map(|(x, s)| (x - s.mean) / s.std)
            .collect())
    }

    pub fn inverse_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.columns.len() {
            return Err(Error::DimensionMismatch {
                expected: self.columns.len(),
                got: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(&self.columns)
            .map(|(z, s)| z * s.std + s.mean)
            .collect())
    }
}

/// Dense row-major numeric matrix with column names and row provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
    feature_names: Vec<String>,
    row_keys: Vec<RowKey>,
    scaling: Option<Scaler>,
}

impl FeatureMatrix {
    /// Builds an unscaled matrix from row-major values. Row keys default to
    /// sequential placeholders.
    pub fn new(values: Vec<f64>, n_rows: usize, feature_names: Vec<String>) -> Result<Self> {
        let n_cols = feature_names.len();
        if values.len() != n_rows * n_cols {
            return Err(Error::DimensionMismatch {
                expected: n_rows * n_cols,
                got: values.len(),
            });
        }
        let mut seen = std::collections::HashSet::new();
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidParameter(format!("duplicate feature name {name}")));
            }
        }
        let row_keys = (0..n_rows)
            .map(|i| RowKey {
                district: 0,
                year: 0,
                doy: (i % 366 + 1) as u16,
            })
            .collect();
        Ok(FeatureMatrix {
            values,
            n_rows,
            n_cols,
            feature_names,
            row_keys,
            scaling: None,
        })
    }

    /// Matrix from nested rows with generated names `x0, x1, ...`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * n_cols);
        for r in rows {
            if r.len() != n_cols {
                return Err(Error::DimensionMismatch {
                    expected: n_cols,
                    got: r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        let names = (0..n_cols).map(|j| format!("x{j}")).collect();
        Self::new(values, rows.len(), names)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.n_cols.max(1))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn row_keys(&self) -> &[RowKey] {
        &self.row_keys
    }

    pub fn scaling(&self) -> Option<&Scaler> {
        self.scaling.as_ref()
    }

    pub fn is_scaled(&self) -> bool {
        self.scaling.is_some()
    }

    /// Rows at `indices`, in that order. Scaling metadata is carried over.
    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let mut values = Vec::with_capacity(indices.len() * self.n_cols);
        let mut row_keys = Vec::with_capacity(indices.len());
        for &i in indices {
            values.extend_from_slice(self.row(i));
            row_keys.push(self.row_keys[i]);
        }
        FeatureMatrix {
            values,
            n_rows: indices.len(),
            n_cols: self.n_cols,
            feature_names: self.feature_names.clone(),
            row_keys,
            scaling: self.scaling.clone(),
        }
    }

    pub fn ensure_finite(&self, what: &str) -> Result<()> {
        if self.values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite(what.to_string()))
        }
    }

    /// Undoes [`standardize`].
    pub fn inverse_transform(&self) -> Result<FeatureMatrix> {
        let scaler = self
            .scaling
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("matrix is not scaled".into()))?;
        let mut values = self.values.clone();
        for row in values.chunks_exact_mut(self.n_cols) {
            for (v, s) in row.iter_mut().zip(&scaler.columns) {
                *v = *v * s.std + s.mean;
            }
        }
        Ok(FeatureMatrix {
            values,
            scaling: None,
            ..self.clone()
        })
    }
}

/// Builds the unscaled feature matrix: the eleven weather parameters, plus
/// LAT/LON/YEAR/DOY when `include_identifiers` is set.
pub fn select_features(dataset: &Dataset, include_identifiers: bool) -> Result<FeatureMatrix> {
    if dataset.is_empty() {
        return Err(Error::EmptyInput("dataset has no records".into()));
    }
    let mut names: Vec<String> = Vec::new();
    if include_identifiers {
        names.extend(IDENTIFIER_COLUMNS.iter().map(|s| s.to_string()));
    }
    names.extend(WEATHER_PARAMETERS.iter().map(|s| s.to_string()));
    let n_cols = names.len();
    let mut values = Vec::with_capacity(dataset.len() * n_cols);
    for r in dataset.records() {
        if include_identifiers {
            values.extend_from_slice(&r.identifiers());
        }
        values.extend_from_slice(&r.weather());
    }
    let row_keys = dataset
        .records()
        .iter()
        .zip(dataset.label_indices())
        .map(|(r, &d)| RowKey {
            district: d,
            year: r.year,
            doy: r.doy,
        })
        .collect();
    Ok(FeatureMatrix {
        values,
        n_rows: dataset.len(),
        n_cols,
        feature_names: names,
        row_keys,
        scaling: None,
    })
}

fn column_moments(matrix: &FeatureMatrix) -> Vec<(f64, f64)> {
    let n = matrix.n_rows as f64;
    let mut means = vec![0.0; matrix.n_cols];
    for row in matrix.rows() {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let mut sq = vec![0.0; matrix.n_cols];
    for row in matrix.rows() {
        for ((s, v), m) in sq.iter_mut().zip(row).zip(&means) {
            let d = v - m;
            *s += d * d;
        }
    }
    means
        .into_iter()
        .zip(sq)
        .map(|(m, s)| (m, (s / n).sqrt()))
        .collect()
}

fn is_constant(mean: f64, std: f64) -> bool {
    std <= 1e-12 * (1.0 + mean.abs())
}

/// Z-scores every column with the population standard deviation. Constant
/// columns are centered only and record a std of 1.
pub fn standardize(matrix: &FeatureMatrix) -> Result<FeatureMatrix> {
    if matrix.is_scaled() {
        return Err(Error::InvalidParameter("matrix is already scaled".into()));
    }
    if matrix.n_rows < 2 {
        return Err(Error::InsufficientData(format!(
            "standardize needs at least 2 rows, got {}",
            matrix.n_rows
        )));
    }
    matrix.ensure_finite("feature matrix")?;
    let columns: Vec<ColumnScaling> = column_moments(matrix)
        .into_iter()
        .map(|(mean, std)| ColumnScaling {
            mean,
            std: if is_constant(mean, std) { 1.0 } else { std },
        })
        .collect();
    let mut values = matrix.values.clone();
    for row in values.chunks_exact_mut(matrix.n_cols) {
        for (v, s) in row.iter_mut().zip(&columns) {
            *v = (*v - s.mean) / s.std;
        }
    }
    Ok(FeatureMatrix {
        values,
        scaling: Some(Scaler {
            feature_names: matrix.feature_names.clone(),
            columns,
        }),
        ..matrix.clone()
    })
}

/// Pearson correlation between every pair of columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub feature_names: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    /// Heatmap-ready CSV: feature names as header row and first column.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["feature".to_string()];
        header.extend(self.feature_names.iter().cloned());
        w.write_record(&header)?;
        for (name, row) in self.feature_names.iter().zip(&self.values) {
            let mut rec = vec![name.clone()];
            rec.extend(row.iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<correlation writer>", e))?;
        Ok(())
    }
}

/// Constant columns correlate 0 with everything else and 1 with themselves.
pub fn correlation_matrix(matrix: &FeatureMatrix) -> Result<CorrelationMatrix> {
    if matrix.n_rows < 2 {
        return Err(Error::InsufficientData(format!(
            "correlation needs at least 2 rows, got {}",
            matrix.n_rows
        )));
    }
    let d = matrix.n_cols;
    let moments = column_moments(matrix);
    let constant: Vec<bool> = moments.iter().map(|&(m, s)| is_constant(m, s)).collect();
    let mut cross = vec![0.0; d * d];
    for row in matrix.rows() {
        for i in 0..d {
            let di = row[i] - moments[i].0;
            for j in i..d {
                cross[i * d + j] += di * (row[j] - moments[j].0);
            }
        }
    }
    let mut values = vec![vec![0.0; d]; d];
    for i in 0..d {
        values[i][i] = 1.0;
        for j in (i + 1)..d {
            let r = if constant[i] || constant[j] {
                0.0
            } else {
                let denom = (cross[i * d + i] * cross[j * d + j]).sqrt();
                (cross[i * d + j] / denom).clamp(-1.0, 1.0)
            };
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix {
        feature_names: matrix.feature_names.clone(),
        values,
    })
}

/// Disjoint train/test row indices, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    pub seed: u64,
    /// Training fraction.
    pub ratio: f64,
}

/// Seeded uniform shuffle, then the first `round(ratio * n)` rows train.
pub fn split_train_test(n_rows: usize, ratio: f64, seed: u64) -> Result<SplitIndices> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "split ratio must be in (0, 1), got {ratio}"
        )));
    }
    if n_rows < 2 {
        return Err(Error::InsufficientData(format!(
            "split needs at least 2 rows, got {n_rows}"
        )));
    }
    let n_train = (ratio * n_rows as f64).round() as usize;
    if n_train == 0 || n_train == n_rows {
        return Err(Error::InvalidParameter(format!(
            "ratio {ratio} leaves an empty side for {n_rows} rows"
        )));
    }
    let mut order: Vec<usize> = (0..n_rows).collect();
    order.shuffle(&mut stream_rng(seed, 0));
    let mut train_rows = order[..n_train].to_vec();
    let mut test_rows = order[n_train..].to_vec();
    train_rows.sort_unstable();
    test_rows.sort_unstable();
    Ok(SplitIndices {
        train_rows,
        test_rows,
        seed,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::WeatherRecord;
    use proptest::prelude::*;

    fn single_column(v: &[f64]) -> FeatureMatrix {
        FeatureMatrix::new(v.to_vec(), v.len(), vec!["a".into()]).unwrap()
    }

    fn record(year: i32, doy: u16, t: f64) -> WeatherRecord {
        WeatherRecord {
            latitude: 24.0,
            longitude: 90.0,
            year,
            doy,
            allsky_sfc_sw_dwn: 18.0,
            t2m: t,
            t2mdew: 20.0,
            ts: 27.0,
            qv2m: 15.0,
            rh2m: 80.0,
            ps: 100.5,
            ws2m: 2.0,
            gwettop: 0.7,
            gwetroot: 0.75,
            gwetprof: 0.72,
        }
    }

    fn dataset(n: usize) -> Dataset {
        let rows = (0..n)
            .map(|i| {
                let label = if i % 2 == 0 { "a" } else { "b" };
                let mut r = record(2012, (i + 1) as u16, 20.0 + i as f64);
                if i % 2 == 1 {
                    r.latitude = 23.0;
                }
                (label.to_string(), r)
            })
            .collect();
        Dataset::from_records(rows).unwrap()
    }

    #[test]
    fn feature_selection_shapes() {
        let ds = dataset(10);
        assert_eq!(select_features(&ds, false).unwrap().n_cols(), 11);
        let with_ids = select_features(&ds, true).unwrap();
        assert_eq!((with_ids.n_rows(), with_ids.n_cols()), (10, 15));
        assert_eq!(with_ids.feature_names()[3], "DOY");
    }

    #[test]
    fn row_keys_join_back_to_dataset() {
        let ds = dataset(10);
        let m = select_features(&ds, false).unwrap();
        for (i, key) in m.row_keys().iter().enumerate() {
            let r = &ds.records()[i];
            assert_eq!(ds.source_label(i), ds.labels()[key.district as usize]);
            assert_eq!((key.year, key.doy), (r.year, r.doy));
            assert_eq!(m.row(i)[1], r.t2m);
        }
    }

    #[test]
    fn standardize_examples() {
        let z = standardize(&single_column(&[0.0, 10.0])).unwrap();
        assert_eq!(z.values(), &[-1.0, 1.0]);
        let s = z.scaling().unwrap().columns[0];
        assert_eq!((s.mean, s.std), (5.0, 5.0));

        let z = standardize(&single_column(&[5.0, 5.0, 5.0])).unwrap();
        assert_eq!(z.values(), &[0.0, 0.0, 0.0]);
        assert_eq!(z.scaling().unwrap().columns[0].std, 1.0);

        // mean 3, population std sqrt(14/3)
        let z = standardize(&single_column(&[1.0, 2.0, 6.0])).unwrap();
        let sd = (14.0f64 / 3.0).sqrt();
        let expected = [-2.0 / sd, -1.0 / sd, 3.0 / sd];
        for (got, want) in z.values().iter().zip(expected) {
            assert!((got - want).abs() < 1e-12);
        }
        for (got, want) in z.values().iter().zip([-0.9258, -0.4629, 1.3887]) {
            assert!((got - want).abs() < 1e-4);
        }
    }

    #[test]
    fn standardize_needs_two_rows() {
        assert!(matches!(
            standardize(&single_column(&[1.0])),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn correlation_examples() {
        let m = FeatureMatrix::from_rows(&[
            vec![1.0, 1.0, -1.0, 2.0, 7.0],
            vec![2.0, 2.0, -2.0, 4.0, 7.0],
            vec![3.0, 3.0, -3.0, 5.0, 7.0],
        ])
        .unwrap();
        let c = correlation_matrix(&m).unwrap();
        assert!((c.get(0, 1) - 1.0).abs() < 1e-12);
        assert!((c.get(0, 2) + 1.0).abs() < 1e-12);
        // Hand evaluation: sxy = 3, sxx = 2, syy = 14/3.
        let expected = 3.0 / (2.0f64 * 14.0 / 3.0).sqrt();
        assert!((c.get(0, 3) - expected).abs() < 1e-12);
        assert!((c.get(0, 3) - 0.9820).abs() < 1e-4);
        assert_eq!(c.get(0, 4), 0.0);
        assert_eq!(c.get(4, 4), 1.0);
    }

    #[test]
    fn correlation_csv_layout() {
        let m = FeatureMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        let mut buf = Vec::new();
        correlation_matrix(&m).unwrap().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "feature,x0,x1\nx0,1,-1\nx1,-1,1\n");
    }

    #[test]
    fn split_counts_and_determinism() {
        let s = split_train_test(100, 0.8, 7).unwrap();
        assert_eq!((s.train_rows.len(), s.test_rows.len()), (80, 20));
        assert_eq!(s, split_train_test(100, 0.8, 7).unwrap());
        assert_ne!(s.train_rows, split_train_test(100, 0.8, 8).unwrap().train_rows);
        let big = split_train_test(170_000, 0.8, 1).unwrap();
        assert_eq!(big.test_rows.len(), 34_000);
    }

    #[test]
    fn degenerate_splits_fail() {
        assert!(split_train_test(2, 0.9, 1).is_err());
        assert!(split_train_test(10, 1.0, 1).is_err());
        assert!(split_train_test(1, 0.5, 1).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn split_is_a_partition(n in 2usize..500, seed in any::<u64>(), ratio in 0.05f64..0.95) {
            if let Ok(s) = split_train_test(n, ratio, seed) {
                let mut all: Vec<usize> = s.train_rows.iter().chain(&s.test_rows).copied().collect();
                all.sort_unstable();
                prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
                let target = (ratio * n as f64).round() as i64;
                prop_assert!((s.train_rows.len() as i64 - target).abs() <= 1);
                prop_assert_eq!(&s, &split_train_test(n, ratio, seed).unwrap());
            }
        }

        #[test]
        fn standardize_round_trips_and_keeps_correlation(
            rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 3), 3..40)
        ) {
            let m = FeatureMatrix::from_rows(&rows).unwrap();
            let z = standardize(&m).unwrap();
            let back = z.inverse_transform().unwrap();
            for (a, b) in m.values().iter().zip(back.values()) {
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
            }
            for j in 0..z.n_cols() {
                let col = z.column(j);
                let mean = crate::stats::mean(&col);
                prop_assert!(mean.abs() < 1e-9);
                let sd = crate::stats::variance(&col, 0).sqrt();
                let scale = z.scaling().unwrap().columns[j];
                if scale.std != 1.0 || sd > 0.5 {
                    prop_assert!((sd - 1.0).abs() < 1e-9);
                }
            }
            let c1 = correlation_matrix(&m).unwrap();
            let c2 = correlation_matrix(&z).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert!((c1.get(i, j) - c2.get(i, j)).abs() < 1e-9);
                }
            }
        }
    }
}
