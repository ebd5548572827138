//! The `drought` binary: subcommands, exit codes, manifests.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::{Command, Output};

use drought_regimes::pipeline::{read_manifest, RunManifest, OUT_DIR_ENV};

fn drought(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drought"))
        .args(args)
        .current_dir(dir)
        .env_remove(OUT_DIR_ENV)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn drought")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn files_under(root: &Path) -> BTreeSet<String> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeSet<String>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/"));
            }
        }
    }
    let mut out = BTreeSet::new();
    walk(root, root, &mut out);
    out
}

fn digest_of<'a>(m: &'a RunManifest, path: &str) -> &'a str {
    &m.outputs.iter().find(|d| d.path == path).unwrap_or_else(|| panic!("{path} not in manifest")).sha256
}

const SYNTH_CONFIG: &str = r#"{"source": {"synth": {"preset": "ci"}}}"#;

#[test]
fn run_all_lists_every_file_it_writes() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "config.json", SYNTH_CONFIG);
    let o = drought(dir.path(), &["run-all", "--config", "config.json", "--out-dir", "out"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("out");
    let m = read_manifest(&out.join("manifest.json")).unwrap();
    let listed: BTreeSet<String> = m.outputs.iter().map(|d| d.path.clone()).collect();
    let mut on_disk = files_under(&out);
    assert!(on_disk.remove("manifest.json"));
    assert_eq!(listed, on_disk);
    for name in [
        "dataset.csv",
        "elbow.csv",
        "silhouette.csv",
        "model.json",
        "assignments.csv",
        "metrics.json",
        "metrics.csv",
        "profile.json",
        "severity.json",
        "daywise_density.csv",
        "geo_density.csv",
        "district_shares.csv",
    ] {
        assert!(listed.contains(name), "missing {name}");
    }
    assert_eq!(m.resolved["k"], serde_json::json!(3));
    // Every default is echoed into the manifest.
    assert_eq!(m.config.clustering.k_max, 8);
    assert_eq!(m.seeds.master, 42);
    assert!(!m.include_identifiers);
}

#[test]
fn silhouette_report_has_both_models() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "config.json", SYNTH_CONFIG);
    let o = drought(dir.path(), &["run-all", "--config", "config.json", "--out-dir", "out"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("out/silhouette.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "model,k,n_clusters,silhouette,selected");
    assert!(lines[1].starts_with("kmeans,3,3,"));
    assert!(lines[2].starts_with("bgm,3,"));
    assert_eq!(lines.len(), 3);
}

#[test]
fn stage_by_stage_matches_run_all() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "config.json", SYNTH_CONFIG);
    let all = drought(d, &["run-all", "--config", "config.json", "--out-dir", "all"]);
    assert!(all.status.success(), "{}", stderr(&all));

    let steps: [&[&str]; 5] = [
        &["synth", "--preset", "ci", "--out-dir", "staged"],
        &["ingest", "--out-dir", "staged"],
        &["cluster", "--out-dir", "staged"],
        &["classify", "--out-dir", "staged"],
        &["analyze", "--out-dir", "staged"],
    ];
    for (i, step) in steps.iter().enumerate() {
        let mut args = step.to_vec();
        let inputs: Vec<String>;
        if i == 1 {
            inputs = std::fs::read_dir(d.join("staged/synth"))
                .unwrap()
                .map(|e| e.unwrap().path())
                .filter(|p| p.extension().is_some_and(|x| x == "csv") && !p.ends_with("regime_tags.csv"))
                .map(|p| p.display().to_string())
                .collect();
            args.extend(inputs.iter().map(String::as_str));
        }
        let o = drought(d, &args);
        assert!(o.status.success(), "{:?}: {}", step, stderr(&o));
    }

    let all_m = read_manifest(&d.join("all/manifest.json")).unwrap();
    let staged = |cmd: &str| read_manifest(&d.join(format!("staged/manifest.{cmd}.json"))).unwrap();
    assert_eq!(digest_of(&staged("ingest"), "dataset.csv"), digest_of(&all_m, "dataset.csv"));
    let cluster = staged("cluster");
    for f in ["assignments.csv", "model.json", "silhouette.csv", "elbow.csv"] {
        assert_eq!(digest_of(&cluster, f), digest_of(&all_m, f), "{f}");
    }
    assert_eq!(digest_of(&staged("classify"), "metrics.json"), digest_of(&all_m, "metrics.json"));
    assert_eq!(digest_of(&staged("analyze"), "severity.json"), digest_of(&all_m, "severity.json"));
}

#[test]
fn missing_source_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "config.json", "{}");
    let o = drought(dir.path(), &["run-all", "--config", "config.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`source`"), "{}", stderr(&o));
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "config.json", r#"{"clustering": {"kmax": 5}}"#);
    let o = drought(dir.path(), &["run-all", "--config", "config.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("kmax"), "{}", stderr(&o));
}

const HEADER: &str = "LAT,LON,YEAR,DOY,ALLSKY_SFC_SW_DWN,T2M,T2MDEW,TS,QV2M,RH2M,PS,WS2M,GWETTOP,GWETROOT,GWETPROF\n";

#[test]
fn zero_valid_rows_is_empty_input() {
    let dir = tempfile::tempdir().unwrap();
    let row = "23.8,90.4,2020,1,-999,-999,-999,-999,-999,-999,-999,-999,-999,-999,-999\n";
    write(dir.path(), "a.csv", &format!("{HEADER}{row}"));
    let o = drought(dir.path(), &["ingest", "a.csv", "--out-dir", "out"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("empty-input"), "{}", stderr(&o));
}

#[test]
fn strict_rejects_invalid_rows() {
    let dir = tempfile::tempdir().unwrap();
    let good = "23.8,90.4,2020,1,14,19,12,19,9,66,101,1.2,0.6,0.7,0.7\n";
    // Wetness above 1 violates a record invariant.
    let bad = "23.8,90.4,2020,2,14,19,12,19,9,66,101,1.2,1.6,0.7,0.7\n";
    write(dir.path(), "a.csv", &format!("{HEADER}{good}{bad}"));
    let lenient = drought(dir.path(), &["ingest", "a.csv", "--out-dir", "lenient"]);
    assert!(lenient.status.success(), "{}", stderr(&lenient));
    let m = read_manifest(&dir.path().join("lenient/manifest.ingest.json")).unwrap();
    assert_eq!(m.resolved["dataset_rows"], serde_json::json!(1));
    let strict = drought(dir.path(), &["ingest", "a.csv", "--strict", "--out-dir", "strict"]);
    assert_eq!(strict.status.code(), Some(3), "{}", stderr(&strict));
}

#[test]
fn ingest_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = drought(d, &["synth", "--out-dir", "s"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let run = |out: &str| {
        let o = drought(d, &["ingest", "s/synth/dhaka.csv", "s/synth/sylhet.csv", "--out-dir", out]);
        assert!(o.status.success(), "{}", stderr(&o));
        read_manifest(&d.join(out).join("manifest.ingest.json")).unwrap()
    };
    let (a, b) = (run("one"), run("two"));
    assert_eq!(a.without_timings(), b.without_timings());
    assert_eq!(a.inputs.len(), 2);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_drought"))
        .args(["synth"])
        .current_dir(dir.path())
        .env(OUT_DIR_ENV, "from-env")
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("from-env/manifest.synth.json").exists());
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for (out, seed) in [("a", "1"), ("b", "2")] {
        let o = drought(d, &["synth", "--seed", seed, "--out-dir", out]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = read_manifest(&d.join("a/manifest.synth.json")).unwrap();
    let b = read_manifest(&d.join("b/manifest.synth.json")).unwrap();
    assert_eq!((a.seeds.master, b.seeds.master), (1, 2));
    assert_ne!(digest_of(&a, "synth/dhaka.csv"), digest_of(&b, "synth/dhaka.csv"));
}
