//! Front end for the cpforge pipeline: argument parsing, configuration and
//! the file-level commands.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use config::{Config, CONFIG_ENV};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("{0}")]
    Data(String),

    #[error("{0}")]
    Unsatisfiable(String),
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io { .. } | CliError::Data(_) => 2,
            CliError::Unsatisfiable(_) => 3,
        }
    }
}

impl From<cpforge::Error> for CliError {
    fn from(e: cpforge::Error) -> Self {
        match e {
            cpforge::Error::InvalidArgument(_) => CliError::Usage(e.to_string()),
            cpforge::Error::Unsatisfiable { .. } => CliError::Unsatisfiable(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cpforge", version, about = "Constructive-primitive level generation and difficulty adjustment")]
pub struct Cli {
    /// Config file; falls back to $CPFORGE_CONFIG, then the built-in defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw rule-clean segments and label them with the oracle.
    Sample(SampleArgs),
    /// Cluster, stratify and actively train the quality forest.
    Learn(LearnArgs),
    /// Generate one level.
    Generate(GenerateArgs),
    /// Linearity, density and leniency for a set of levels.
    Metrics(MetricsArgs),
    /// Pairwise compression distance for a set of levels.
    Ncd(MetricsArgs),
    /// Fixed-one-parameter level sets with per-set histograms.
    Range(RangeArgs),
    /// Play simulated sessions against the difficulty adjuster.
    Adapt(AdaptArgs),
    /// Draw a level or tile file as text or a pixmap.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Records to keep; defaults to the configured sample size.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Learning-curve CSV; defaults to the model path with a `.curve.csv` extension.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    /// Feature-importance CSV.
    #[arg(long)]
    pub importance: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Ascii,
    Ppm,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Ascii => "txt",
            Format::Ppm => "ppm",
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// 1 (hard) to 3 (lenient); random when omitted.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub leniency: Option<u8>,
    /// 1 (sparse) to 3 (dense); random when omitted.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub density: Option<u8>,
    /// 1 (rough) to 3 (smooth); random when omitted.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub linearity: Option<u8>,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub cps: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the tile map next to the level file; repeatable.
    #[arg(long, value_enum)]
    pub render: Vec<Format>,
    /// Print the generation time in milliseconds.
    #[arg(long)]
    pub time: bool,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Glob of level files.
    #[arg(long)]
    pub levels: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RangeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub per_setting: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct AdaptArgs {
    /// Profile name or five comma-separated survival probabilities.
    #[arg(long)]
    pub agent: String,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub games: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Uniformly random difficulty instead of the adjuster.
    #[arg(long = "static")]
    pub static_baseline: bool,
    /// Build real CPs at the chosen difficulty with this model.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Start each trial from the previous trial's posteriors.
    #[arg(long)]
    pub carry_over: bool,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Level file or tile file.
    #[arg(long)]
    pub level: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Ascii)]
    pub format: Format,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (program name first), runs the command and maps failures to exit codes.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Sample(a) => commands::sample(&cfg, &a),
        Command::Learn(a) => commands::learn(&cfg, &a),
        Command::Generate(a) => commands::generate(&cfg, &a),
        Command::Metrics(a) => commands::metrics(&a),
        Command::Ncd(a) => commands::ncd(&a),
        Command::Range(a) => commands::range(&cfg, &a),
        Command::Adapt(a) => commands::adapt(&cfg, &a),
        Command::Render(a) => commands::render(&a),
    }
}
