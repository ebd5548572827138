use drought_regimes::clustering::compact_labels;
use drought_regimes::pipeline::{
    read_assignments_csv, run_all, run_cluster, run_ingest, run_synth, ClusterModelKind, Config, ModelChoice,
    RunContext, Source, SynthSource,
};
use drought_regimes::synth::{Preset, SynthSpec};
use drought_regimes::ErrorCategory;

fn synth_config() -> Config {
    Config {
        source: Some(Source::Synth(SynthSource::default())),
        ..Config::default()
    }
}

#[test]
fn pinned_bgm_labels_flow_downstream() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = synth_config();
    config.clustering.model = ModelChoice::Bgm;
    let mut ctx = RunContext::new(dir.path(), "run-all", &config).unwrap();
    let out = run_all(&mut ctx, &config).unwrap();
    let art = &out.cluster.artifact;
    assert_eq!(art.selected_model, ClusterModelKind::Bgm);
    let (bgm, _) = compact_labels(&art.bgm.assignments());
    assert_eq!(art.labeling.apply(&bgm).unwrap(), out.cluster.assignments);
    assert!(art.silhouettes.iter().any(|s| s.model == ClusterModelKind::Bgm && s.selected));
}

#[test]
fn assignments_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let config = synth_config();
    let mut ctx = RunContext::new(dir.path(), "cluster", &config).unwrap();
    let synth = run_synth(&mut ctx, &SynthSpec::preset(Preset::Ci), 9).unwrap();
    let ingest = run_ingest(&mut ctx, &config, &synth.files).unwrap();
    let cluster = run_cluster(&mut ctx, &config, &ingest.dataset).unwrap();
    let back = read_assignments_csv(&dir.path().join("assignments.csv"), &ingest.dataset).unwrap();
    assert_eq!(back, cluster.assignments);
}

#[test]
fn overlapping_regime_spec_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = SynthSpec::preset(Preset::Ci);
    spec.regimes[0].day_ranges.push((40, 60));
    let path = dir.path().join("spec.json");
    std::fs::write(&path, serde_json::to_string(&spec).unwrap()).unwrap();
    let config = Config {
        source: Some(Source::Synth(SynthSource {
            preset: Preset::Ci,
            spec: Some(path),
        })),
        ..Config::default()
    };
    let mut ctx = RunContext::new(&dir.path().join("out"), "run-all", &config).unwrap();
    let err = run_all(&mut ctx, &config).unwrap_err();
    assert_eq!(err.category(), ErrorCategory::Config);
    assert!(err.to_string().contains("overlap"), "{err}");
}

#[test]
fn identifiers_join_the_feature_space_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = synth_config();
    config.features.include_identifiers = true;
    config.clustering.k = Some(3);
    let mut ctx = RunContext::new(dir.path(), "run-all", &config).unwrap();
    let out = run_all(&mut ctx, &config).unwrap();
    let names = &out.cluster.artifact.feature_names;
    assert_eq!(names.len(), 15);
    assert!(names.iter().any(|n| n == "DOY"));
    assert_eq!(out.cluster.artifact.k_source, "config");
    assert!(ctx.manifest().include_identifiers);
}

#[test]
fn relative_source_paths_resolve_against_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let sub = dir.path().join("conf");
    std::fs::create_dir(&sub).unwrap();
    std::fs::write(sub.join("c.json"), r#"{"source": {"files": ["data/a.csv"]}}"#).unwrap();
    let c = Config::from_file(&sub.join("c.json")).unwrap();
    assert_eq!(c.source, Some(Source::Files(vec![sub.join("data/a.csv")])));
}
