//! Run manifest: what ran, with which settings, on which inputs, producing
//! which files.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::Config;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    /// Relative to the output directory for outputs; as given for inputs.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Seeds derived from the master seed, one per randomized step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub master: u64,
    pub synth: u64,
    pub kmeans: u64,
    pub bgm: u64,
    pub silhouette: u64,
    pub split: u64,
    pub forest: u64,
}

impl Seeds {
    pub fn from_master(master: u64) -> Self {
        use crate::seeding::derive_seed;
        Seeds {
            master,
            synth: master,
            kmeans: derive_seed(master, "kmeans"),
            bgm: derive_seed(master, "bgm"),
            silhouette: derive_seed(master, "silhouette"),
            split: derive_seed(master, "split"),
            forest: derive_seed(master, "forest"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    /// Effective configuration with every default filled in.
    pub config: Config,
    pub seeds: Seeds,
    pub include_identifiers: bool,
    pub strict: bool,
    /// Values resolved during the run (detected k, selected model, ...).
    pub resolved: BTreeMap<String, serde_json::Value>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub timings_ms: BTreeMap<String, f64>,
}

impl RunManifest {
    /// The manifest with timings cleared, for reproducibility comparisons.
    pub fn without_timings(&self) -> RunManifest {
        RunManifest {
            timings_ms: BTreeMap::new(),
            ..self.clone()
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn digest_file(path: &Path, display: String) -> Result<FileDigest> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(FileDigest {
        path: display,
        sha256: sha256_hex(&bytes),
        bytes: bytes.len() as u64,
    })
}

/// Output directory plus the manifest under construction. Every file a
/// stage writes goes through [`RunContext::write`] or
/// [`RunContext::record_output`], so the manifest lists all of them.
#[derive(Debug)]
pub struct RunContext {
    out_dir: PathBuf,
    manifest: RunManifest,
}

impl RunContext {
    pub fn new(out_dir: &Path, command: &str, config: &Config) -> Result<Self> {
        std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
        Ok(RunContext {
            out_dir: out_dir.to_path_buf(),
            manifest: RunManifest {
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                command: command.to_string(),
                config: config.clone(),
                seeds: Seeds::from_master(config.seed),
                include_identifiers: config.features.include_identifiers,
                strict: config.ingest.strict,
                resolved: BTreeMap::new(),
                inputs: Vec::new(),
                outputs: Vec::new(),
                timings_ms: BTreeMap::new(),
            },
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    pub fn seeds(&self) -> Seeds {
        self.manifest.seeds
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    /// Writes `name` under the output directory through `fill` and records it.
    pub fn write<F>(&mut self, name: &str, fill: F) -> Result<PathBuf>
    where
        F: FnOnce(&mut dyn Write) -> Result<()>,
    {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let mut buf: Vec<u8> = Vec::new();
        fill(&mut buf)?;
        std::fs::write(&path, &buf).map_err(|e| Error::io(&path, e))?;
        self.push_output(name, &buf);
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            w.write_all(b"\n").map_err(|e| Error::io(name, e))
        })
    }

    /// Records a file some other writer already put under the output
    /// directory.
    pub fn record_output(&mut self, path: &Path) -> Result<()> {
        let rel = path
            .strip_prefix(&self.out_dir)
            .unwrap_or(path)
            .to_string_lossy()
            .replace('\\', "/");
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        self.push_output(&rel, &bytes);
        Ok(())
    }

    fn push_output(&mut self, name: &str, bytes: &[u8]) {
        let digest = FileDigest {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        };
        self.manifest.outputs.retain(|d| d.path != digest.path);
        self.manifest.outputs.push(digest);
    }

    /// Records an input file. Files inside the output directory are listed
    /// relative to it.
    pub fn record_input(&mut self, path: &Path) -> Result<()> {
        let display = match path.strip_prefix(&self.out_dir) {
            Ok(rel) => rel.to_string_lossy().replace('\\', "/"),
            Err(_) => path.display().to_string(),
        };
        let digest = digest_file(path, display)?;
        self.manifest.inputs.push(digest);
        Ok(())
    }

    pub fn resolve(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.manifest
            .resolved
            .insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    /// Runs `f` and records its wall time under `stage`.
    pub fn timed<T>(&mut self, stage: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f(self);
        let ms = start.elapsed().as_secs_f64() * 1e3;
        *self.manifest.timings_ms.entry(stage.to_string()).or_default() += ms;
        out
    }

    pub fn manifest(&self) -> &RunManifest {
        &self.manifest
    }

    /// `manifest.json` for `run-all`, `manifest.<command>.json` otherwise,
    /// so stage-by-stage runs sharing a directory keep every manifest.
    pub fn manifest_file_name(&self) -> String {
        match self.manifest.command.as_str() {
            "run-all" => "manifest.json".to_string(),
            c => format!("manifest.{c}.json"),
        }
    }

    /// Writes the manifest file and returns the final manifest. The manifest
    /// does not list itself.
    pub fn finish(self) -> Result<RunManifest> {
        let path = self.out_dir.join(self.manifest_file_name());
        let mut text = serde_json::to_string_pretty(&self.manifest)?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(self.manifest)
    }
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
