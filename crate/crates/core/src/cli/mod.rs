//! Batch front end: argument parsing, run configuration and the subcommands of
//! the `paracalc` binary.
//!
//! Exit codes: 0 pass, 2 configuration or input error, 3 numerical contract
//! failure (including a failed pass flag), 4 hypothesis violation.

pub mod commands;
pub mod config;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::Result;

pub use config::{DecomposeBlock, RunConfig, SweepBlock, RUN_CONFIG_SCHEMA, RUN_CONFIG_VERSION};

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Debug, Parser)]
#[command(name = "paracalc", version, about = "Pseudodifferential calculus experiments on periodic grids")]
pub struct Cli {
    /// JSON run configuration (schema version 1).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random probe.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Grid such as `d=1,n=1024,L=32pi`.
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// Only errors on the console.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Max deviation of ψ + Σφ_p from 1 on the lattice.
    PartitionCheck,
    /// Four-way split, support check and elementary expansion of a symbol.
    Decompose(DecomposeArgs),
    /// Seminorms and half-sum norms of a symbol.
    Seminorms(SeminormArgs),
    /// Applies Op(σ) to a probe field.
    Apply(ApplyArgs),
    /// Commutator and remainder of two symbols on a probe field.
    Commutator(CommutatorArgs),
    /// Runs one estimate experiment, or all experiments of the config file.
    Experiment(ExperimentArgs),
    /// Reruns an experiment across resolutions.
    Sweep(SweepArgs),
    /// Re-reads and checks report files.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub symbol: Option<String>,
    /// Cut-off parameters, comma separated.
    #[arg(long = "n-cut", value_delimiter = ',')]
    pub n_cut: Vec<u32>,
    /// Elementary truncations, comma separated; the last one is archived.
    #[arg(long = "k-sweep", value_delimiter = ',')]
    pub k_sweep: Vec<usize>,
    /// Also run the Bernstein check up to this order.
    #[arg(long)]
    pub bernstein: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SeminormArgs {
    #[arg(long)]
    pub symbol: Option<String>,
    /// Number of ξ-derivatives; defaults to 2[d/2]+2.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub s: f64,
    /// x-derivatives in the Lipschitz seminorm.
    #[arg(long, default_value_t = 0)]
    pub l: usize,
}

#[derive(Debug, Args)]
pub struct ApplyArgs {
    #[arg(long)]
    pub symbol: Option<String>,
    /// `random` or `packet:<j>`.
    #[arg(long, default_value = "random")]
    pub probe: String,
    /// `auto`, `dense` or `elementary`.
    #[arg(long, default_value = "auto")]
    pub mode: String,
    /// Truncation for the elementary mode.
    #[arg(long, default_value_t = 8)]
    pub k: usize,
    /// Timing, cost and agreement with the dense oracle.
    #[arg(long)]
    pub stats: bool,
}

#[derive(Debug, Args)]
pub struct CommutatorArgs {
    #[arg(long)]
    pub sigma1: Option<String>,
    #[arg(long)]
    pub sigma2: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub n: usize,
    #[arg(long, default_value = "random")]
    pub probe: String,
}

#[derive(Debug, Args, Clone)]
pub struct ExperimentArgs {
    /// Theorem tag; without it every experiment of the config file runs.
    pub tag: Option<String>,
    #[arg(long)]
    pub id: Option<String>,
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long)]
    pub sigma1: Option<String>,
    #[arg(long)]
    pub sigma2: Option<String>,
    /// Shorthand for `--sigma1 japanese:m=<m1>`.
    #[arg(long, allow_negative_numbers = true)]
    pub m1: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub s: Option<f64>,
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub s0: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub probes: Option<usize>,
    /// Slope window `j_min..j_max`.
    #[arg(long)]
    pub slope: Option<String>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Resolutions, comma separated.
    #[arg(long = "n-pts", value_delimiter = ',')]
    pub n_pts: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Report files.
    #[arg(required = true)]
    pub reports: Vec<PathBuf>,
    /// Recompute each report from its stored configuration and compare.
    #[arg(long)]
    pub rerun: bool,
}

/// Parses the process arguments, runs the command and returns the exit code.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = if cli.quiet { "error" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
    crate::init_thread_pool();
    match commands::run(&cli) {
        Ok(true) => 0,
        Ok(false) => 3,
        Err(e) => {
            eprintln!("paracalc: {e}");
            e.exit_code()
        }
    }
}
