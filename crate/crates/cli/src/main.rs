mod commands;
mod config;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Failure;
use crate::config::AppConfig;

#[derive(Parser)]
#[command(name = "trajgen", version, about = "Interaction-aware traffic scenario generation")]
struct Cli {
    /// TOML settings file with [codec], [decoder], [train], [metrics], [llm] and [render] sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for model initialization, batch order and synthesis.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract map, vehicle and interaction codes from a scenario file.
    Analyze {
        scenario: PathBuf,
        /// Output code text file; stdout when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Train the decoder on scenario files or synthetic scenarios.
    Train(TrainArgs),
    /// Decode a scenario from a code file or a text description.
    Generate(GenerateArgs),
    /// Compare predicted scenarios with ground truth, paired by file name.
    Evaluate {
        gt_dir: PathBuf,
        pred_dir: PathBuf,
        /// Metric table output file.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Emit JSON instead of CSV.
        #[arg(long)]
        json: bool,
    },
    /// Write synthetic scenarios.
    Synth(SynthArgs),
    /// Build or query a map library.
    #[command(name = "retrieve-map", subcommand)]
    RetrieveMap(MapCommand),
}

#[derive(Args)]
pub struct TrainArgs {
    /// Directory of scenario JSON files.
    #[arg(long, conflicts_with = "synth", required_unless_present = "synth")]
    pub data: Option<PathBuf>,
    /// Train on this many synthetic scenarios instead.
    #[arg(long)]
    pub synth: Option<usize>,
    #[arg(long, default_value_t = 3)]
    pub max_others: usize,
    /// Checkpoint to write.
    #[arg(short, long)]
    pub out: PathBuf,
    /// Continue from a checkpoint, including optimizer state.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Override the configured epoch count.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Training log file; records also go to stdout.
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Print every n-th record.
    #[arg(long, default_value_t = 50)]
    pub log_every: u64,
}

#[derive(Args)]
pub struct GenerateArgs {
    /// Code text file (skips the language model).
    #[arg(long, conflicts_with = "description", required_unless_present = "description")]
    pub codes: Option<PathBuf>,
    /// Natural-language scene description.
    #[arg(long)]
    pub description: Option<String>,
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Map library to retrieve the lane map from.
    #[arg(long, conflicts_with = "map_from", required_unless_present = "map_from")]
    pub map_index: Option<PathBuf>,
    /// Use this scenario's lane map and place the output in its frame.
    #[arg(long)]
    pub map_from: Option<PathBuf>,
    #[arg(short, long)]
    pub out: PathBuf,
    /// Also write an SVG plot.
    #[arg(long)]
    pub render: Option<PathBuf>,
    /// Use the offline mock provider instead of the configured endpoint.
    #[arg(long)]
    pub mock: bool,
    /// JSON object mapping descriptions to mock replies.
    #[arg(long, requires = "mock")]
    pub mock_script: Option<PathBuf>,
    /// Write the codes used for decoding.
    #[arg(long)]
    pub codes_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SynthArgs {
    /// Number of random scenarios to write into `out` (a directory).
    #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
    pub count: Option<usize>,
    /// Scenario specification JSON; `out` is then a file.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub max_others: usize,
    #[arg(short, long)]
    pub out: PathBuf,
    /// Also write an SVG next to each scenario.
    #[arg(long)]
    pub render: bool,
}

#[derive(Subcommand)]
pub enum MapCommand {
    /// Index the maps of every scenario file in a directory.
    Build {
        data: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Find the best map for a map code.
    Query {
        #[arg(long)]
        index: PathBuf,
        /// Six comma-separated integers.
        #[arg(long, conflicts_with = "codes", required_unless_present = "codes", allow_hyphen_values = true)]
        code: Option<String>,
        /// Code text file whose Map line is used.
        #[arg(long)]
        codes: Option<PathBuf>,
        /// Write the retrieved lane map as JSON.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), Failure> {
    let config = match &cli.config {
        Some(p) => AppConfig::load(p).map_err(Failure::input)?,
        None => AppConfig::default(),
    }
    .with_seed(cli.seed);
    match cli.command {
        Command::Analyze { scenario, out } => commands::analyze(&config, &scenario, out.as_deref()),
        Command::Train(args) => commands::train(&config, cli.seed, &args),
        Command::Generate(args) => commands::generate(&config, &args),
        Command::Evaluate { gt_dir, pred_dir, out, json } => {
            commands::evaluate(&config, &gt_dir, &pred_dir, out.as_deref(), json)
        }
        Command::Synth(args) => commands::synth(&config, cli.seed.unwrap_or(0), &args),
        Command::RetrieveMap(cmd) => commands::retrieve_map(&config, cmd),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
