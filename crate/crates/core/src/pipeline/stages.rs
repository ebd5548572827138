//! The pipeline stages. Each stage reads its inputs, writes its artifacts
//! through a [`RunContext`] and returns its results for the next stage.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::info;
use serde::{Deserialize, Serialize};

use super::config::{Config, ModelChoice, Source};
use super::manifest::RunContext;
use crate::classification::{
    dtree_fit, evaluate, gnb_fit, knn_fit, reference_checks, rf_fit, ClassifierModel, ConfusionMatrix,
    ReferenceCheck, TreeParams,
};
use crate::clustering::{
    bgm_fit, canonicalize_by_statistic, canonicalize_labels, compact_labels, detect_elbow, elbow_sweep_models,
    silhouette_score, BgmModel, BgmParams, ClusterLabeling, ElbowPoint, KMeansModel, KMeansParams,
};
use crate::density::{
    daywise_density, district_shares, geo_density, label_severity, profile_clusters, write_district_shares_csv,
    ClusterProfile, DistrictShare, SeverityLabel,
};
use crate::error::{Error, Result};
use crate::ingest::{load_dataset, read_dataset_csv, write_dataset, CleanOptions, CleanReport, Dataset, ParseOptions};
use crate::preprocess::{correlation_matrix, select_features, split_train_test, standardize, FeatureMatrix, Scaler};
use crate::synth::{generate, write_district_csvs, SynthSpec, SyntheticData};

fn csv_io(name: &str) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::io(name, e)
}

// ---------------------------------------------------------------- synth

#[derive(Debug)]
pub struct SynthOutput {
    pub data: SyntheticData,
    pub spec: SynthSpec,
    /// Per-district export files, in district order.
    pub files: Vec<PathBuf>,
}

/// Resolves the generator spec for a synth source.
pub fn synth_spec(source: &super::config::SynthSource) -> Result<SynthSpec> {
    match &source.spec {
        Some(path) => SynthSpec::from_json_file(path),
        None => Ok(SynthSpec::preset(source.preset)),
    }
}

/// Generates data and writes `synth/<district>.csv`, `synth/regimes.json`
/// and the ground-truth tags `synth/regime_tags.csv`.
pub fn run_synth(ctx: &mut RunContext, spec: &SynthSpec, seed: u64) -> Result<SynthOutput> {
    ctx.timed("synth", |ctx| {
        let data = generate(spec, seed)?;
        let dir = ctx.path("synth");
        let files = write_district_csvs(&data, &dir)?;
        for f in &files {
            ctx.record_output(f)?;
        }
        ctx.write_json("synth/regimes.json", spec)?;
        ctx.write("synth/regime_tags.csv", |w| {
            let mut out = csv::Writer::from_writer(w);
            out.write_record(["district", "year", "doy", "regime", "regime_name"])?;
            for (i, (r, &tag)) in data.dataset.records().iter().zip(&data.regimes).enumerate() {
                out.write_record([
                    data.dataset.source_label(i).to_string(),
                    r.year.to_string(),
                    r.doy.to_string(),
                    tag.to_string(),
                    data.regime_names[tag].clone(),
                ])?;
            }
            out.flush().map_err(csv_io("regime_tags.csv"))
        })?;
        ctx.resolve("synth_rows", data.dataset.len())?;
        info!("generated {} rows for {} districts", data.dataset.len(), data.sites.len());
        Ok(SynthOutput {
            data,
            spec: spec.clone(),
            files,
        })
    })
}

// ---------------------------------------------------------------- ingest

#[derive(Debug)]
pub struct IngestOutput {
    pub dataset: Dataset,
    pub report: CleanReport,
}

/// Parses and cleans `inputs`, writing `dataset.csv` and
/// `ingest_report.json`.
pub fn run_ingest(ctx: &mut RunContext, config: &Config, inputs: &[PathBuf]) -> Result<IngestOutput> {
    ctx.timed("ingest", |ctx| {
        for p in inputs {
            ctx.record_input(p)?;
        }
        let parse = ParseOptions {
            fill_value: config.ingest.fill_value,
        };
        let clean = CleanOptions {
            strict: config.ingest.strict,
        };
        let (dataset, report) = load_dataset(inputs, &parse, &clean)?;
        ctx.write("dataset.csv", |w| write_dataset(&dataset, w))?;
        ctx.write_json("ingest_report.json", &report)?;
        ctx.resolve("dataset_rows", dataset.len())?;
        ctx.resolve("district_count", dataset.district_count())?;
        info!(
            "ingested {} rows from {} districts ({} dropped)",
            dataset.len(),
            dataset.district_count(),
            report.dropped()
        );
        Ok(IngestOutput { dataset, report })
    })
}

/// Reads a cleaned dataset written by [`run_ingest`] and records it as an
/// input.
pub fn load_cleaned_dataset(ctx: &mut RunContext, path: &Path) -> Result<Dataset> {
    ctx.record_input(path)?;
    read_dataset_csv(path)
}

/// Standardized learning features as configured.
pub fn feature_matrix(config: &Config, dataset: &Dataset) -> Result<FeatureMatrix> {
    standardize(&select_features(dataset, config.features.include_identifiers)?)
}

// ---------------------------------------------------------------- cluster

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterModelKind {
    Kmeans,
    Bgm,
}

impl ClusterModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ClusterModelKind::Kmeans => "kmeans",
            ClusterModelKind::Bgm => "bgm",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SilhouetteRow {
    pub model: ClusterModelKind,
    pub k: usize,
    /// Non-empty clusters in the model's hard assignments.
    pub n_clusters: usize,
    /// `None` when fewer than two clusters are occupied.
    pub silhouette: Option<f64>,
    pub selected: bool,
}

/// Everything needed to reapply the clustering: scaling, both fitted
/// models, the canonical relabeling and the validation scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub feature_names: Vec<String>,
    pub include_identifiers: bool,
    pub scaling: Scaler,
    pub elbow: Vec<ElbowPoint>,
    pub k: usize,
    /// "elbow" or "config".
    pub k_source: String,
    pub kmeans_params: KMeansParams,
    pub kmeans: KMeansModel,
    pub bgm_params: BgmParams,
    pub bgm: BgmModel,
    /// Raw BGM component per compact BGM cluster id.
    pub bgm_components: Vec<usize>,
    pub silhouette_sample_cap: usize,
    pub silhouette_seed: u64,
    pub silhouettes: Vec<SilhouetteRow>,
    pub selected_model: ClusterModelKind,
    /// Raw id of the selected model → canonical id.
    pub labeling: ClusterLabeling,
}

#[derive(Debug, Clone)]
pub struct ClusterOutput {
    pub matrix: FeatureMatrix,
    pub artifact: ModelArtifact,
    /// Canonical cluster id per dataset row.
    pub assignments: Vec<usize>,
}

fn scored(matrix: &FeatureMatrix, labels: &[usize], cap: usize, seed: u64) -> Result<(usize, Option<f64>)> {
    let occupied = {
        let mut l = labels.to_vec();
        l.sort_unstable();
        l.dedup();
        l.len()
    };
    if occupied < 2 {
        return Ok((occupied, None));
    }
    Ok((occupied, Some(silhouette_score(matrix, labels, cap, seed)?)))
}

/// Elbow sweep, K-means and BGM at the chosen k, silhouette comparison and
/// canonical relabeling. Writes `correlation.csv`, `elbow.csv`,
/// `silhouette.csv`, `model.json` and `assignments.csv`.
pub fn run_cluster(ctx: &mut RunContext, config: &Config, dataset: &Dataset) -> Result<ClusterOutput> {
    let seeds = ctx.seeds();
    let c = config.clustering;
    let raw = ctx.timed("features", |ctx| {
        let raw = select_features(dataset, config.features.include_identifiers)?;
        let corr = correlation_matrix(&raw)?;
        ctx.write("correlation.csv", |w| corr.write_csv(w))?;
        Ok(raw)
    })?;
    let matrix = standardize(&raw)?;
    let scaling = matrix.scaling().expect("standardized").clone();

    let (k, k_source, elbow, kmeans) = ctx.timed("kmeans", |ctx| {
        let base = config.kmeans_params(1, seeds.kmeans);
        let k_max = c.k_max.min(matrix.n_rows());
        let top = c.k.map_or(k_max, |k| k.max(k_max).min(matrix.n_rows()));
        let models = elbow_sweep_models(&matrix, c.k_min, top, &base)?;
        let elbow: Vec<ElbowPoint> = models
            .iter()
            .filter(|m| m.k <= k_max)
            .map(|m| ElbowPoint { k: m.k, inertia: m.inertia })
            .collect();
        let (k, source) = match c.k {
            Some(k) => (k, "config"),
            None => (detect_elbow(&elbow)?, "elbow"),
        };
        let kmeans = models
            .into_iter()
            .find(|m| m.k == k)
            .ok_or_else(|| Error::Config(format!("clustering.k = {k} exceeds the {} rows", matrix.n_rows())))?;
        ctx.write("elbow.csv", |w| {
            let mut out = csv::Writer::from_writer(w);
            out.write_record(["k", "inertia"])?;
            for p in &elbow {
                out.write_record([p.k.to_string(), p.inertia.to_string()])?;
            }
            out.flush().map_err(csv_io("elbow.csv"))
        })?;
        info!("k = {k} ({source}); K-means inertia {}", kmeans.inertia);
        Ok((k, source.to_string(), elbow, kmeans))
    })?;
    let kmeans_params = config.kmeans_params(k, seeds.kmeans);

    let bgm_params = config.clustering.bgm.params(k, seeds.bgm);
    let bgm = ctx.timed("bgm", |_| bgm_fit(&matrix, &bgm_params))?;
    let (bgm_labels, bgm_components) = compact_labels(&bgm.assignments());
    info!(
        "BGM: {} iterations, weights {:?}",
        bgm.iterations_run, bgm.weights
    );

    let cap = c.silhouette_sample_cap;
    let (km_n, km_sil, bgm_n, bgm_sil) = ctx.timed("silhouette", |_| {
        let (km_n, km_sil) = scored(&matrix, &kmeans.assignments, cap, seeds.silhouette)?;
        let (bgm_n, bgm_sil) = scored(&matrix, &bgm_labels, cap, seeds.silhouette)?;
        Ok((km_n, km_sil, bgm_n, bgm_sil))
    })?;
    let selected = match c.model {
        ModelChoice::Kmeans => ClusterModelKind::Kmeans,
        ModelChoice::Bgm => {
            if bgm_n < 2 {
                return Err(Error::UndefinedScore(
                    "pinned BGM model occupies fewer than two clusters".into(),
                ));
            }
            ClusterModelKind::Bgm
        }
        ModelChoice::Auto => match (km_sil, bgm_sil) {
            (Some(a), Some(b)) if b > a => ClusterModelKind::Bgm,
            _ => ClusterModelKind::Kmeans,
        },
    };
    info!("silhouette: kmeans {km_sil:?}, bgm {bgm_sil:?}; using {}", selected.as_str());
    let raw_assignments: &[usize] = match selected {
        ClusterModelKind::Kmeans => &kmeans.assignments,
        ClusterModelKind::Bgm => &bgm_labels,
    };
    let labeling = canonicalize_labels(raw_assignments, dataset)?;
    let assignments = labeling.apply(raw_assignments)?;

    let silhouettes = vec![
        SilhouetteRow {
            model: ClusterModelKind::Kmeans,
            k,
            n_clusters: km_n,
            silhouette: km_sil,
            selected: selected == ClusterModelKind::Kmeans,
        },
        SilhouetteRow {
            model: ClusterModelKind::Bgm,
            k,
            n_clusters: bgm_n,
            silhouette: bgm_sil,
            selected: selected == ClusterModelKind::Bgm,
        },
    ];
    ctx.write("silhouette.csv", |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["model", "k", "n_clusters", "silhouette", "selected"])?;
        for s in &silhouettes {
            out.write_record([
                s.model.as_str().to_string(),
                s.k.to_string(),
                s.n_clusters.to_string(),
                s.silhouette.map_or(String::new(), |v| v.to_string()),
                s.selected.to_string(),
            ])?;
        }
        out.flush().map_err(csv_io("silhouette.csv"))
    })?;

    let artifact = ModelArtifact {
        feature_names: matrix.feature_names().to_vec(),
        include_identifiers: config.features.include_identifiers,
        scaling,
        elbow,
        k,
        k_source,
        kmeans_params,
        kmeans,
        bgm_params,
        bgm,
        bgm_components,
        silhouette_sample_cap: cap,
        silhouette_seed: seeds.silhouette,
        silhouettes,
        selected_model: selected,
        labeling,
    };
    ctx.write_json("model.json", &artifact)?;
    write_assignments(ctx, dataset, &assignments)?;
    ctx.resolve("k", k)?;
    ctx.resolve("selected_model", selected)?;
    ctx.resolve("silhouette_kmeans", km_sil)?;
    ctx.resolve("silhouette_bgm", bgm_sil)?;
    ctx.resolve(
        "bgm_effective_components",
        artifact.bgm.effective_components(bgm_params.weight_floor).len(),
    )?;
    Ok(ClusterOutput {
        matrix,
        artifact,
        assignments,
    })
}

fn write_assignments(ctx: &mut RunContext, dataset: &Dataset, assignments: &[usize]) -> Result<()> {
    ctx.write("assignments.csv", |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["district", "year", "doy", "cluster"])?;
        for (i, (r, c)) in dataset.records().iter().zip(assignments).enumerate() {
            out.write_record([
                dataset.source_label(i).to_string(),
                r.year.to_string(),
                r.doy.to_string(),
                c.to_string(),
            ])?;
        }
        out.flush().map_err(csv_io("assignments.csv"))
    })?;
    Ok(())
}

/// Reads `assignments.csv` and aligns it with `dataset` rows through the
/// (district, year, doy) key. Every dataset row must be covered.
pub fn read_assignments_csv(path: &Path, dataset: &Dataset) -> Result<Vec<usize>> {
    let mut index: HashMap<(&str, i32, u16), usize> = HashMap::with_capacity(dataset.len());
    for (i, r) in dataset.records().iter().enumerate() {
        if index.insert((dataset.source_label(i), r.year, r.doy), i).is_some() {
            return Err(Error::Conflict(format!(
                "district {} has two records for {}/{}",
                dataset.source_label(i),
                r.year,
                r.doy
            )));
        }
    }
    let mut reader = csv::Reader::from_path(path)?;
    let mut out: Vec<Option<usize>> = vec![None; dataset.len()];
    let p = path.display().to_string();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec?;
        let field = |j: usize, name: &str| -> Result<&str> {
            rec.get(j).ok_or_else(|| Error::Schema {
                path: p.clone(),
                column: name.to_string(),
            })
        };
        let parse_err = |name: &str, value: &str| Error::Parse {
            path: p.clone(),
            row: line + 2,
            column: name.to_string(),
            value: value.to_string(),
        };
        let district = field(0, "district")?;
        let year_s = field(1, "year")?;
        let doy_s = field(2, "doy")?;
        let cluster_s = field(3, "cluster")?;
        let year: i32 = year_s.parse().map_err(|_| parse_err("year", year_s))?;
        let doy: u16 = doy_s.parse().map_err(|_| parse_err("doy", doy_s))?;
        let cluster: usize = cluster_s.parse().map_err(|_| parse_err("cluster", cluster_s))?;
        if let Some(&i) = index.get(&(district, year, doy)) {
            out[i] = Some(cluster);
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(i, c)| {
            c.ok_or_else(|| {
                Error::EmptyInput(format!(
                    "{p}: no assignment for district {} row {i}",
                    dataset.source_label(i)
                ))
            })
        })
        .collect()
}

// ---------------------------------------------------------------- classify

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierReport {
    pub classifier: String,
    pub hyperparameters: serde_json::Value,
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    /// Test rows per actual class (confusion-matrix row sums).
    pub test_class_counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub ratio: f64,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub split: SplitSummary,
    pub class_count: usize,
    pub classifiers: Vec<ClassifierReport>,
    /// Decision tree capped at the configured shallow depth.
    pub baseline: ClassifierReport,
    /// Published confusion matrices recomputed, with divergence flags.
    pub reference: Vec<ReferenceCheck>,
}

impl MetricsReport {
    pub fn accuracy_of(&self, classifier: &str) -> Option<f64> {
        self.classifiers
            .iter()
            .chain(std::iter::once(&self.baseline))
            .find(|c| c.classifier == classifier)
            .map(|c| c.accuracy)
    }
}

fn report(
    name: &str,
    hyper: serde_json::Value,
    model: &ClassifierModel,
    test: &FeatureMatrix,
    labels: &[usize],
) -> Result<ClassifierReport> {
    let confusion = evaluate(model, test, labels)?;
    Ok(ClassifierReport {
        classifier: name.to_string(),
        hyperparameters: hyper,
        accuracy: confusion.accuracy,
        test_class_counts: confusion.row_sums(),
        confusion,
    })
}

/// 80:20 (configurable) split, four classifiers plus a shallow tree
/// baseline. Writes `metrics.json` and `metrics.csv`.
pub fn run_classify(
    ctx: &mut RunContext,
    config: &Config,
    dataset: &Dataset,
    assignments: &[usize],
) -> Result<MetricsReport> {
    if assignments.len() != dataset.len() {
        return Err(Error::DimensionMismatch {
            expected: dataset.len(),
            got: assignments.len(),
        });
    }
    let seeds = ctx.seeds();
    let cc = config.classification;
    let matrix = feature_matrix(config, dataset)?;
    let split = split_train_test(matrix.n_rows(), cc.split_ratio, seeds.split)?;
    let train = matrix.select_rows(&split.train_rows);
    let test = matrix.select_rows(&split.test_rows);
    let y_train: Vec<usize> = split.train_rows.iter().map(|&i| assignments[i]).collect();
    let y_test: Vec<usize> = split.test_rows.iter().map(|&i| assignments[i]).collect();

    let mut classifiers = Vec::new();
    let knn = ctx.timed("knn", |_| {
        let model: ClassifierModel = knn_fit(&train, &y_train, cc.k_neighbors)?.into();
        report("knn", serde_json::json!({ "k_neighbors": cc.k_neighbors }), &model, &test, &y_test)
    })?;
    classifiers.push(knn);
    let gnb = ctx.timed("gaussian_nb", |_| {
        let model: ClassifierModel = gnb_fit(&train, &y_train)?.into();
        let eps = match &model {
            ClassifierModel::GaussianNb(m) => m.epsilon,
            _ => unreachable!(),
        };
        report(
            "gaussian_nb",
            serde_json::json!({ "var_smoothing": crate::classification::naive_bayes::VAR_SMOOTHING, "epsilon": eps }),
            &model,
            &test,
            &y_test,
        )
    })?;
    classifiers.push(gnb);
    let tree = ctx.timed("decision_tree", |_| {
        let model: ClassifierModel = dtree_fit(&train, &y_train, &cc.tree)?.into();
        report("decision_tree", serde_json::to_value(cc.tree)?, &model, &test, &y_test)
    })?;
    classifiers.push(tree);
    let forest_params = config.forest_params(seeds.forest);
    let forest = ctx.timed("random_forest", |_| {
        let model: ClassifierModel = rf_fit(&train, &y_train, &forest_params)?.into();
        report("random_forest", serde_json::to_value(forest_params)?, &model, &test, &y_test)
    })?;
    classifiers.push(forest);
    let baseline_params = TreeParams {
        max_depth: Some(cc.baseline_depth),
        ..cc.tree
    };
    let baseline = ctx.timed("decision_tree", |_| {
        let model: ClassifierModel = dtree_fit(&train, &y_train, &baseline_params)?.into();
        report(
            &format!("decision_tree_depth_{}", cc.baseline_depth),
            serde_json::to_value(baseline_params)?,
            &model,
            &test,
            &y_test,
        )
    })?;

    let report = MetricsReport {
        split: SplitSummary {
            ratio: split.ratio,
            seed: split.seed,
            n_train: split.train_rows.len(),
            n_test: split.test_rows.len(),
        },
        class_count: crate::classification::class_count_of(assignments),
        classifiers,
        baseline,
        reference: reference_checks(),
    };
    ctx.write_json("metrics.json", &report)?;
    ctx.write("metrics.csv", |w| write_metrics_csv(&report, w))?;
    for c in report.classifiers.iter().chain(std::iter::once(&report.baseline)) {
        info!("{}: accuracy {:.4}", c.classifier, c.accuracy);
    }
    Ok(report)
}

/// One row per classifier in the layout classifier / matrix / accuracy;
/// published reference rows follow with their reported percentages.
pub fn write_metrics_csv<W: Write>(report: &MetricsReport, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["source", "classifier", "confusion_matrix", "accuracy", "reported_percent", "diverges"])?;
    for c in report.classifiers.iter().chain(std::iter::once(&report.baseline)) {
        out.write_record([
            "computed",
            &c.classifier,
            &c.confusion.to_compact_string(),
            &c.accuracy.to_string(),
            "",
            "",
        ])?;
    }
    for r in &report.reference {
        out.write_record([
            "reference",
            &r.classifier,
            &r.confusion.to_compact_string(),
            &r.recomputed_accuracy.to_string(),
            &r.reported_percent.to_string(),
            &r.diverges.to_string(),
        ])?;
    }
    out.flush().map_err(csv_io("metrics.csv"))
}

// ---------------------------------------------------------------- analyze

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub profile: ClusterProfile,
    pub severity: Vec<SeverityLabel>,
    pub district_shares: Vec<DistrictShare>,
    pub daywise_bandwidths: Vec<f64>,
    pub geo_bandwidths: Vec<(f64, f64)>,
}

/// Cluster profiles, severity labels and densities. Writes `profile.json`,
/// `severity.json`, `boxplot.csv`, `radar.csv`, `daywise_density.csv`,
/// `geo_density.csv` and `district_shares.csv`.
pub fn run_analyze(
    ctx: &mut RunContext,
    config: &Config,
    dataset: &Dataset,
    assignments: &[usize],
) -> Result<AnalysisReport> {
    ctx.timed("analyze", |ctx| {
        let a = &config.analysis;
        let profile = profile_clusters(dataset, assignments)?;
        let daywise = daywise_density(dataset, assignments, a.doy_step)?;
        let severity = label_severity(&profile, &a.severity, Some(&daywise))?;
        let geo = geo_density(dataset, assignments, &a.geo_grid, a.geo_bandwidths)?;
        let shares = district_shares(dataset, assignments)?;

        ctx.write_json("profile.json", &profile)?;
        ctx.write_json("severity.json", &severity)?;
        ctx.write("boxplot.csv", |w| profile.write_boxplot_csv(w))?;
        ctx.write("radar.csv", |w| profile.write_radar_csv(w))?;
        ctx.write("daywise_density.csv", |w| daywise.write_csv(w))?;
        ctx.write("geo_density.csv", |w| geo.write_csv(w))?;
        ctx.write("district_shares.csv", |w| write_district_shares_csv(&shares, w))?;
        for s in &severity {
            info!(
                "cluster {}: {:?} ({}), dominant days {:?}",
                s.cluster, s.extremity, s.season, s.dominant_days
            );
        }
        Ok(AnalysisReport {
            profile,
            severity,
            district_shares: shares,
            daywise_bandwidths: daywise.series.iter().map(|s| s.bandwidths[0]).collect(),
            geo_bandwidths: geo.series.iter().map(|s| (s.bandwidths[0], s.bandwidths[1])).collect(),
        })
    })
}

// ---------------------------------------------------------------- run-all

#[derive(Debug)]
pub struct RunAllOutput {
    pub synth: Option<SynthOutput>,
    pub ingest: IngestOutput,
    pub cluster: ClusterOutput,
    pub metrics: MetricsReport,
    pub analysis: AnalysisReport,
    /// Fraction of rows whose canonical cluster matches the generating
    /// regime (regimes ranked by the same wetness rule), synthetic runs only.
    pub regime_recovery: Option<f64>,
}

/// Agreement between canonical clusters and ground-truth regimes, both
/// ordered by descending median GWETTOP.
pub fn regime_recovery(dataset: &Dataset, regimes: &[usize], assignments: &[usize]) -> Result<f64> {
    let wetness: Vec<f64> = dataset.records().iter().map(|r| r.gwettop).collect();
    let (compact, _) = compact_labels(regimes);
    let truth = canonicalize_by_statistic(&compact, &wetness)?.apply(&compact)?;
    let hits = truth.iter().zip(assignments).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / assignments.len() as f64)
}

/// Source → ingest → cluster → classify → analyze.
pub fn run_all(ctx: &mut RunContext, config: &Config) -> Result<RunAllOutput> {
    config.validate()?;
    let source = config.require_source()?.clone();
    let (synth, inputs) = match &source {
        Source::Files(paths) => {
            if paths.is_empty() {
                return Err(Error::Config("`source.files` lists no files".into()));
            }
            (None, paths.clone())
        }
        Source::Synth(s) => {
            let spec = synth_spec(s)?;
            let out = run_synth(ctx, &spec, ctx.seeds().synth)?;
            let files = out.files.clone();
            (Some(out), files)
        }
    };
    let ingest = run_ingest(ctx, config, &inputs)?;
    let cluster = run_cluster(ctx, config, &ingest.dataset)?;
    let metrics = run_classify(ctx, config, &ingest.dataset, &cluster.assignments)?;
    let analysis = run_analyze(ctx, config, &ingest.dataset, &cluster.assignments)?;
    let regime_recovery = match &synth {
        Some(s) if s.data.dataset == ingest.dataset => {
            let r = regime_recovery(&ingest.dataset, &s.data.regimes, &cluster.assignments)?;
            ctx.resolve("regime_recovery", r)?;
            Some(r)
        }
        _ => None,
    };
    Ok(RunAllOutput {
        synth,
        ingest,
        cluster,
        metrics,
        analysis,
        regime_recovery,
    })
}
