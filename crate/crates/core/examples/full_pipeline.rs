//! The whole pipeline from a JSON config, with the run manifest.
//!
//! ```text
//! cargo run --release --example full_pipeline -- [out-dir]
//! ```
//! The output directory falls back to `DROUGHT_OUT_DIR`, then a temporary
//! directory.

use std::path::PathBuf;

use drought_regimes::pipeline::{run_all, Config, RunContext, OUT_DIR_ENV};

const CONFIG: &str = r#"{
    "seed": 42,
    "source": { "synth": { "preset": "ci" } },
    "clustering": { "k_max": 8, "model": "auto" },
    "classification": { "n_trees": 50 }
}"#;

fn main() -> drought_regimes::Result<()> {
    let tmp = tempfile::tempdir().map_err(|e| drought_regimes::Error::io("tempdir", e))?;
    let out_dir = std::env::args()
        .nth(1)
        .or_else(|| std::env::var(OUT_DIR_ENV).ok())
        .map(PathBuf::from)
        .unwrap_or_else(|| tmp.path().to_path_buf());

    let config = Config::from_json_str(CONFIG)?;
    let mut ctx = RunContext::new(&out_dir, "run-all", &config)?;
    let out = run_all(&mut ctx, &config)?;
    let manifest = ctx.finish()?;

    let art = &out.cluster.artifact;
    println!("k = {} ({}), selected {}", art.k, art.k_source, art.selected_model.as_str());
    for s in &art.silhouettes {
        println!("  silhouette {:<6} {:?}", s.model.as_str(), s.silhouette);
    }
    for c in &out.metrics.classifiers {
        println!("  {:<14} {:.4}", c.classifier, c.accuracy);
    }
    for s in &out.analysis.severity {
        println!("  cluster {} -> {:?} ({})", s.cluster, s.extremity, s.season);
    }
    if let Some(r) = out.regime_recovery {
        println!("regime recovery {r:.4}");
    }
    println!("{} outputs in {}:", manifest.outputs.len(), out_dir.display());
    for f in &manifest.outputs {
        println!("  {} {}", &f.sha256[..12], f.path);
    }
    Ok(())
}
