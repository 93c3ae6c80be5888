use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "kfrisk", version, about = "Dynamic kidney-failure risk scoring", arg_required_else_help = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Model weight file (JSON).
    #[arg(long, global = true, env = "KFDEEP_WEIGHTS")]
    pub weights: Option<PathBuf>,
    /// Seed for every random step; overrides seeds in config files.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score one patient from a filled CSV template.
    Predict {
        #[arg(long, short)]
        input: PathBuf,
    },
    /// KFRE baseline risks after every visit of a CSV template.
    Kfre {
        #[arg(long, short)]
        input: PathBuf,
        /// 4v2y, 8v2y, 4v5y, 8v5y or all.
        #[arg(long, default_value = "all")]
        variant: String,
    },
    /// Train a model and write its weight file.
    Train {
        /// JSON job: `{"cohort": {...}, "fit": {...}}`, both optional.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Patient records (JSON array, as written by `simulate`); a synthetic
        /// cohort is generated when omitted.
        #[arg(long, short)]
        input: Option<PathBuf>,
        #[arg(long, short)]
        output: PathBuf,
        /// Also write the config, seed and loss history here.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Discrimination, calibration and net-benefit metrics.
    Evaluate {
        /// CSV with a `label` column, one column per model and an optional
        /// `group` column.
        #[arg(long, conflicts_with = "cohort", required_unless_present = "cohort")]
        scores: Option<PathBuf>,
        /// Patient records to label and score with the model and KFRE.
        #[arg(long)]
        cohort: Option<PathBuf>,
        /// Outcome horizon in years for `--cohort` (2 or 5).
        #[arg(long, default_value_t = 5)]
        horizon: u8,
    },
    /// Write a seeded synthetic cohort.
    Simulate {
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0.06)]
        prevalence: f64,
    },
    /// Start the HTTP scoring service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
}
