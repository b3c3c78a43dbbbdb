//! Argument parsing and dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{self, RunOptions};
use crate::config::{PipelineConfig, KEYS};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "movepat", version, about = "Cluster time series by movement patterns", after_help = KEYS)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// `key = value` config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Input CSV.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of clusters.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// euclidean, dtw, levenshtein or mpbd.
    #[arg(long, global = true)]
    pub metric: Option<String>,
    /// kmeans, kmeans-features, kmedoids or hierarchical.
    #[arg(long, global = true)]
    pub algorithm: Option<String>,
    /// Any config key, e.g. `--set linkage=average`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Exit with status 3 when an index is degenerate.
    #[arg(long, global = true)]
    pub strict: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load, align, fill, scale, discretize and drop outliers.
    Preprocess,
    /// Pairwise distance matrix for the configured metric.
    Distmat,
    /// Raster features, or an external feature file when `features` is set.
    Features {
        /// Also write one PGM image per series here.
        #[arg(long)]
        pgm_dir: Option<PathBuf>,
    },
    /// Cluster with the configured algorithm.
    Cluster,
    /// Validity indices for the current assignment.
    Evaluate,
    /// Cluster and score every k in k_min..=k_max.
    Sweep,
    /// Per-cluster summaries.
    Profile,
    /// preprocess, distmat or features, cluster, evaluate, profile.
    Pipeline,
}

impl GlobalArgs {
    /// Defaults, then the config file, then `--set`, then the dedicated flags.
    pub fn config(&self) -> Result<PipelineConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::from_file(path)?,
            None => PipelineConfig::default(),
        };
        for kv in &self.overrides {
            let (key, value) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            cfg.set(key.trim(), value)?;
        }
        if let Some(p) = &self.input {
            cfg.input = Some(p.clone());
        }
        if let Some(p) = &self.out {
            cfg.out = p.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if let Some(m) = &self.metric {
            cfg.set("metric", m)?;
        }
        if let Some(a) = &self.algorithm {
            cfg.set("algorithm", a)?;
        }
        cfg.check()?;
        Ok(cfg)
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = cli.global.config()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} threads: {e}", cli.global.threads)))?;
    let mut opts = RunOptions {
        strict: cli.global.strict,
        pgm_dir: None,
    };
    pool.install(|| match cli.command {
        Command::Preprocess => commands::preprocess(&cfg),
        Command::Distmat => commands::distmat(&cfg),
        Command::Features { pgm_dir } => {
            opts.pgm_dir = pgm_dir;
            commands::features(&cfg, &opts)
        }
        Command::Cluster => commands::cluster(&cfg).map(|_| ()),
        Command::Evaluate => commands::evaluate_step(&cfg, &opts).map(|_| ()),
        Command::Sweep => commands::sweep(&cfg, &opts),
        Command::Profile => commands::profile(&cfg),
        Command::Pipeline => commands::pipeline(&cfg, &opts),
    })
}
