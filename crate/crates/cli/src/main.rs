use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hafcp_cli::{cmd_fuzzify, cmd_mine, cmd_pipeline, cmd_report, cmd_train, CliError, PipelineConfig};

#[derive(Parser)]
#[command(name = "hafcp", version, about = "Mine highly associated fuzzy churn patterns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct StepArgs {
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Config overrides as `--dotted.key value`, e.g. `--mining.k 10`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "OVERRIDES")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Train the baseline model; write model, importance and metrics.
    Train(StepArgs),
    /// Fit membership functions on the training split; write specs and item frame.
    Fuzzify(StepArgs),
    /// Mine the top-k patterns among churned training rows.
    Mine(StepArgs),
    /// Retrain with each pattern as a feature; write the comparison report.
    Report(StepArgs),
    /// Run train, fuzzify, mine and report in sequence.
    Pipeline(StepArgs),
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("HAFCP_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::input("InvalidConfig", format!("HAFCP_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::internal(e.to_string()))
}

type Step = fn(&PipelineConfig) -> Result<(), CliError>;

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    let (step, args): (Step, StepArgs) = match cli.command {
        Command::Train(a) => (cmd_train, a),
        Command::Fuzzify(a) => (cmd_fuzzify, a),
        Command::Mine(a) => (cmd_mine, a),
        Command::Report(a) => (cmd_report, a),
        Command::Pipeline(a) => (cmd_pipeline, a),
    };
    let cfg = PipelineConfig::load(args.config.as_deref(), &args.overrides)?;
    step(&cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
