//! Command-line surface. Every long flag doubles as a key in the matching
//! section of the `--config` file.

use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};

pub const SEED_ENV: &str = "BUBBLESTAMP_SEED";

#[derive(Debug, Parser)]
#[command(name = "bubblestamp", version, about = "Explosive-root testing and bubble date-stamping")]
pub struct Cli {
    /// TOML file with one section per command; flags override its keys.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a price path and write it as CSV.
    #[command(args_override_self = true)]
    Simulate(SimulateArgs),
    /// Full-sample statistic and decision against the origination threshold.
    #[command(args_override_self = true)]
    Test(TestArgs),
    /// Recursive statistic path, threshold curves and episode dates.
    #[command(args_override_self = true)]
    Datestamp(DatestampArgs),
    /// Root estimate with confidence intervals.
    #[command(args_override_self = true)]
    Infer(InferArgs),
    /// Monte Carlo critical-value table.
    #[command(args_override_self = true)]
    Calibrate(CalibrateArgs),
    /// Simulation experiments comparing SV-ADF with the single-threshold baseline.
    #[command(args_override_self = true)]
    Bench(BenchArgs),
    /// Combined text summary per series.
    #[command(args_override_self = true)]
    Report(ReportArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Test(_) => "test",
            Command::Datestamp(_) => "datestamp",
            Command::Infer(_) => "infer",
            Command::Calibrate(_) => "calibrate",
            Command::Bench(_) => "bench",
            Command::Report(_) => "report",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VolKind {
    Constant,
    Logar1,
    Garch,
}

impl VolKind {
    pub fn name(&self) -> &'static str {
        match self {
            VolKind::Constant => "constant",
            VolKind::Logar1 => "logar1",
            VolKind::Garch => "garch",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Coefficient,
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Svadf,
    Pwy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HypothesisArg {
    H0,
    H1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Power,
    Accuracy,
    Size,
    Gap,
}

#[derive(Debug, Clone, Args)]
pub struct SeedArg {
    /// Random seed.
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SeriesArgs {
    /// Input CSV files, processed concurrently.
    #[arg(required = true, value_name = "CSV")]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value = "date")]
    pub date_column: String,
    #[arg(long, default_value = "close")]
    pub price_column: String,
    /// Analyse log prices instead of levels.
    #[arg(long)]
    pub log_prices: bool,
}

#[derive(Debug, Clone, Args)]
pub struct StatArgs {
    /// Fraction of the sample in the first window.
    #[arg(long, default_value_t = 0.1)]
    pub r0: f64,
    #[arg(long, value_enum, default_value_t = VariantArg::Coefficient)]
    pub variant: VariantArg,
    /// Fixed number of lagged differences.
    #[arg(long, default_value_t = 0)]
    pub lags: usize,
    /// Select the lag order per window, up to this value (overrides --lags).
    #[arg(long)]
    pub max_lag: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct OriginationArgs {
    /// Origination boundary log(n s) / DIVISOR.
    #[arg(long, default_value_t = 10.0, value_name = "DIVISOR")]
    pub orig_divisor: f64,
    /// Origination boundary from a calibration table CSV.
    #[arg(long, value_name = "CSV")]
    pub orig_table: Option<PathBuf>,
    /// Constant origination boundary.
    #[arg(long, value_name = "VALUE")]
    pub orig_fixed: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct RuleArgs {
    #[command(flatten)]
    pub origination: OriginationArgs,
    /// Collapse boundary log(n s) / DIVISOR.
    #[arg(long, default_value_t = 2.0, value_name = "DIVISOR")]
    pub coll_divisor: f64,
    #[arg(long, value_name = "CSV")]
    pub coll_table: Option<PathBuf>,
    #[arg(long, value_name = "VALUE")]
    pub coll_fixed: Option<f64>,
    /// Observations the statistic must stay above the origination boundary.
    #[arg(long, default_value_t = 42)]
    pub min_above: usize,
    /// Observations the statistic must stay below the collapse boundary.
    #[arg(long, default_value_t = 21)]
    pub min_below: usize,
    /// Dips below the origination boundary of at most this length are bridged.
    #[arg(long, default_value_t = 5)]
    pub gap: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Svadf)]
    pub method: MethodArg,
    /// Baseline boundary from a calibration table CSV.
    #[arg(long, value_name = "CSV")]
    pub pwy_table: Option<PathBuf>,
    /// Constant baseline boundary.
    #[arg(long, value_name = "VALUE")]
    pub pwy_fixed: Option<f64>,
    /// Replications for calibrating the baseline boundary when no table is given.
    #[arg(long, default_value_t = 1000)]
    pub pwy_replications: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Bubble origination fraction (requires --r-f).
    #[arg(long)]
    pub r_e: Option<f64>,
    /// Bubble collapse fraction (requires --r-e).
    #[arg(long)]
    pub r_f: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = VolKind::Constant)]
    pub vol: VolKind,
    #[arg(long, default_value_t = 1.0)]
    pub sigma0: f64,
    #[arg(long, default_value_t = 0.5)]
    pub eta: f64,
    /// Fixed log-volatility persistence (default: iterated-log rule).
    #[arg(long)]
    pub phi: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha_g: f64,
    #[arg(long, default_value_t = 0.94)]
    pub beta_g: f64,
    #[arg(long, default_value_t = 0.0)]
    pub x0: f64,
    /// Collapse-and-reset model: level after collapse drawn with this scale.
    #[arg(long)]
    pub reset_sd: Option<f64>,
    /// First business day of the simulated calendar.
    #[arg(long, default_value = "2000-01-03")]
    pub start_date: NaiveDate,
    #[arg(long, default_value = "close")]
    pub price_column: String,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Output file (default: stdout).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub stat: StatArgs,
    #[command(flatten)]
    pub origination: OriginationArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DatestampArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub stat: StatArgs,
    #[command(flatten)]
    pub rules: RuleArgs,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Directory for `<label>_path.csv`, `<label>_volatility.csv` and `episodes.csv`.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Also write rolling volatility of log-returns over this many observations.
    #[arg(long)]
    pub vol_window: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct InferArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    /// Confidence level.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// First date of the estimation window.
    #[arg(long)]
    pub start: Option<NaiveDate>,
    /// Last date of the estimation window.
    #[arg(long)]
    pub end: Option<NaiveDate>,
}

#[derive(Debug, Clone, Args)]
pub struct CalibrateArgs {
    #[arg(long, value_enum, default_value_t = HypothesisArg::H0)]
    pub hypothesis: HypothesisArg,
    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',', action = clap::ArgAction::Set, default_value = "250,500,1000")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    pub replications: usize,
    /// Quantile level.
    #[arg(long, default_value_t = 0.9)]
    pub q: f64,
    #[arg(long, value_enum, default_value_t = VariantArg::Coefficient)]
    pub variant: VariantArg,
    /// Volatility under H0.
    #[arg(long, value_enum, default_value_t = VolKind::Constant)]
    pub vol: VolKind,
    #[arg(long, default_value_t = 0.5)]
    pub eta: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha_g: f64,
    #[arg(long, default_value_t = 0.94)]
    pub beta_g: f64,
    /// Nuisance draws averaged under H1.
    #[arg(long, default_value_t = 20)]
    pub outer: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = Experiment::Power)]
    pub experiment: Experiment,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 500)]
    pub replications: usize,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 0.3)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = VolKind::Logar1)]
    pub vol: VolKind,
    #[arg(long, default_value_t = 0.5)]
    pub eta: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha_g: f64,
    #[arg(long, default_value_t = 0.94)]
    pub beta_g: f64,
    /// Replications for calibrating the baseline boundary.
    #[arg(long, default_value_t = 1000)]
    pub pwy_replications: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    /// CSV with one row per cell.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub stat: StatArgs,
    #[command(flatten)]
    pub rules: RuleArgs,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, default_value_t = crate::ingest::DEFAULT_VOL_WINDOW)]
    pub vol_window: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}
