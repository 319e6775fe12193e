use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use graphforge::{GabrielBoundary, GabrielMode, Method, Symmetrize};

#[derive(Debug, Parser)]
#[command(name = "graphforge", version, about = "Build proximity graphs from tabular feature data")]
pub struct Cli {
    /// Worker threads for graph construction.
    #[arg(long, global = true, env = "GRAPHFORGE_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a CSV, build a graph and write a bundle.
    Build(BuildArgs),
    /// Print topology diagnostics for a bundle.
    Stats(StatsArgs),
    /// Compare builders against brute-force oracles.
    Validate(ValidateArgs),
    /// De-duplicate and down-sample classes to fixed counts.
    Sample(SampleArgs),
    /// Stratified train/test split, optionally min-max scaled.
    Split(SplitArgs),
}

#[derive(Debug, Args)]
pub struct CsvArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Class label column.
    #[arg(long)]
    pub label_col: Option<String>,
    /// Integer row id column.
    #[arg(long)]
    pub id_col: Option<String>,
    #[arg(long)]
    pub delimiter: Option<char>,
}

/// Construction parameters shared by `build` and `validate`.
#[derive(Debug, Args, Default)]
pub struct MethodArgs {
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// SNN threshold θ.
    #[arg(long)]
    pub theta: Option<usize>,
    /// `union` or `none`.
    #[arg(long)]
    pub symmetrize: Option<Symmetrize>,
    /// `exact`, `candidate` or `candidate:N`.
    #[arg(long)]
    pub gabriel_mode: Option<GabrielMode>,
    /// `open` or `closed`.
    #[arg(long)]
    pub gabriel_boundary: Option<GabrielBoundary>,
    /// Store shared-neighbour counts as SNN edge weights.
    #[arg(long)]
    pub snn_weighted: bool,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub csv: CsvArgs,
    #[arg(long)]
    pub method: Option<Method>,
    #[command(flatten)]
    pub params: MethodArgs,
    /// Drop duplicate rows before construction.
    #[arg(long)]
    pub dedup: bool,
    /// TOML file of defaults; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Recorded in the manifest; construction itself draws no random numbers.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    /// Print JSON instead of a table.
    #[arg(long)]
    pub json: bool,
    /// Also write report.json, report.txt and manifest.json here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Check a bundle against the oracle for its recorded config.
    #[arg(long, conflicts_with = "random")]
    pub bundle: Option<PathBuf>,
    /// Check freshly built graphs on random uniform points.
    #[arg(long, required_unless_present = "bundle")]
    pub random: bool,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Methods to check in random mode; all when omitted.
    #[arg(long = "method")]
    pub methods: Vec<Method>,
    #[command(flatten)]
    pub params: MethodArgs,
    /// Also write report.json and manifest.json here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub csv: CsvArgs,
    /// Per-class target as `CLASS=COUNT`; repeat for each kept class.
    #[arg(long = "target", value_parser = parse_target, required = true)]
    pub targets: Vec<(String, usize)>,
    #[arg(long)]
    pub dedup: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; receives sample.csv and manifest.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[command(flatten)]
    pub csv: CsvArgs,
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fit min-max scaling on train and apply it to both parts.
    #[arg(long)]
    pub scale: bool,
    /// Output directory; receives train.csv, test.csv, scaler.json and manifest.json.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_target(s: &str) -> Result<(String, usize), String> {
    let (class, count) = s.split_once('=').ok_or_else(|| format!("expected CLASS=COUNT, got '{s}'"))?;
    let count = count.parse().map_err(|_| format!("'{count}' is not a count"))?;
    Ok((class.to_string(), count))
}
