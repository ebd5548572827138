use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use drought_regimes::ingest::read_dataset_csv;
use drought_regimes::pipeline::{
    read_assignments_csv, run_all, run_analyze, run_classify, run_cluster, run_ingest, run_synth, synth_spec,
    Config, RunContext, Source, SynthSource, OUT_DIR_ENV,
};
use drought_regimes::synth::{Preset, SynthSpec};
use drought_regimes::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "drought", version, about = "Drought-severity regime discovery pipeline")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// JSON config file; every key has a default except `source`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = "drought-out")]
    out_dir: PathBuf,
    /// Fail on the first invalid row instead of dropping it.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and clean export CSVs into dataset.csv.
    Ingest {
        /// Input files; defaults to `source.files` from the config.
        inputs: Vec<PathBuf>,
    },
    /// Elbow sweep, K-means, BGM and silhouette model selection.
    Cluster {
        /// Cleaned dataset; defaults to <out-dir>/dataset.csv.
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Train and evaluate the four classifiers on cluster labels.
    Classify(Labeled),
    /// Cluster profiles, severity labels and density grids.
    Analyze(Labeled),
    /// Generate a synthetic dataset in the export format.
    Synth {
        #[arg(long, value_enum)]
        preset: Option<PresetArg>,
        /// Regime/extent spec (JSON); overrides --preset.
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Every stage, from the configured source.
    RunAll,
}

#[derive(Args, Debug)]
struct Labeled {
    /// Defaults to <out-dir>/dataset.csv.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Defaults to <out-dir>/assignments.csv.
    #[arg(long)]
    assignments: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PresetArg {
    Ci,
    Paper,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Ci => Preset::Ci,
            PresetArg::Paper => Preset::Paper,
        }
    }
}

fn load_config(g: &Global) -> Result<Config> {
    let mut config = match &g.config {
        Some(p) => Config::from_file(p)?,
        None => Config::default(),
    };
    if let Some(seed) = g.seed {
        config.seed = seed;
    }
    if g.strict {
        config.ingest.strict = true;
    }
    config.validate()?;
    Ok(config)
}

fn or_default(path: &Option<PathBuf>, out_dir: &Path, name: &str) -> PathBuf {
    path.clone().unwrap_or_else(|| out_dir.join(name))
}

fn labeled_inputs(ctx: &mut RunContext, l: &Labeled, out_dir: &Path) -> Result<(drought_regimes::Dataset, Vec<usize>)> {
    let dataset_path = or_default(&l.dataset, out_dir, "dataset.csv");
    let assignments_path = or_default(&l.assignments, out_dir, "assignments.csv");
    ctx.record_input(&dataset_path)?;
    ctx.record_input(&assignments_path)?;
    let dataset = read_dataset_csv(&dataset_path)?;
    let assignments = read_assignments_csv(&assignments_path, &dataset)?;
    Ok((dataset, assignments))
}

fn run(cli: Cli) -> Result<()> {
    let mut config = load_config(&cli.global)?;
    let out_dir = cli.global.out_dir.clone();
    let name = match &cli.command {
        Command::Ingest { .. } => "ingest",
        Command::Cluster { .. } => "cluster",
        Command::Classify(_) => "classify",
        Command::Analyze(_) => "analyze",
        Command::Synth { .. } => "synth",
        Command::RunAll => "run-all",
    };
    if let Command::Synth { preset, spec } = &cli.command {
        // Flags take precedence over a configured synth source.
        let mut source = match &config.source {
            Some(Source::Synth(s)) => s.clone(),
            _ => SynthSource::default(),
        };
        if let Some(p) = preset {
            source.preset = (*p).into();
            source.spec = None;
        }
        if spec.is_some() {
            source.spec = spec.clone();
        }
        config.source = Some(Source::Synth(source));
    }

    let mut ctx = RunContext::new(&out_dir, name, &config)?;
    match &cli.command {
        Command::Ingest { inputs } => {
            let inputs = if inputs.is_empty() {
                match config.require_source()? {
                    Source::Files(f) => f.clone(),
                    Source::Synth(_) => {
                        return Err(Error::Config(
                            "`ingest` needs input files or `source.files`; use `run-all` for a synth source".into(),
                        ))
                    }
                }
            } else {
                inputs.clone()
            };
            run_ingest(&mut ctx, &config, &inputs)?;
        }
        Command::Cluster { dataset } => {
            let path = or_default(dataset, &out_dir, "dataset.csv");
            ctx.record_input(&path)?;
            let dataset = read_dataset_csv(&path)?;
            run_cluster(&mut ctx, &config, &dataset)?;
        }
        Command::Classify(l) => {
            let (dataset, assignments) = labeled_inputs(&mut ctx, l, &out_dir)?;
            run_classify(&mut ctx, &config, &dataset, &assignments)?;
        }
        Command::Analyze(l) => {
            let (dataset, assignments) = labeled_inputs(&mut ctx, l, &out_dir)?;
            run_analyze(&mut ctx, &config, &dataset, &assignments)?;
        }
        Command::Synth { .. } => {
            let spec: SynthSpec = match config.require_source()? {
                Source::Synth(s) => synth_spec(s)?,
                Source::Files(_) => unreachable!("synth source set above"),
            };
            let seed = ctx.seeds().synth;
            run_synth(&mut ctx, &spec, seed)?;
        }
        Command::RunAll => {
            run_all(&mut ctx, &config)?;
        }
    }
    let manifest = ctx.manifest_file_name();
    ctx.finish()?;
    println!("{}", out_dir.join(manifest).display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let category = e.category();
            eprintln!("drought: {} error: {e}", category.as_str());
            ExitCode::from(category.exit_code() as u8)
        }
    }
}
