use std::path::PathBuf;
use std::process::ExitCode;

use caclab::commands::{self, Output};
use caclab::{CliError, ExperimentConfig, LoadedConfig, Overrides, PolicyKind};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "caclab", version, about = "Call admission control experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recurrence and CTMC blocking over the utilization grid
    Analyze(Common),
    /// One simulation per selected policy at the configured rates
    Simulate(Common),
    /// Train the FNCAC network and write its parameter file
    Train(Common),
    /// Full utilization sweep to sweep.csv
    Sweep(Common),
    /// The five figure CSV files
    Figures(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML); defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated subset of conventional,fuzzy,fncac
    #[arg(long)]
    policies: Option<String>,
}

fn load(common: &Common) -> Result<LoadedConfig, CliError> {
    let overrides = Overrides {
        seed: common.seed,
        out: common.out.clone(),
        policies: common.policies.as_deref().map(PolicyKind::parse_list).transpose()?,
    };
    match &common.config {
        Some(path) => ExperimentConfig::load(path, &overrides),
        None => ExperimentConfig::parse("", &overrides),
    }
}

type Verb = fn(&LoadedConfig) -> Result<Output, CliError>;

fn execute(command: Command) -> Result<Output, CliError> {
    let (verb, common): (Verb, Common) = match command {
        Command::Analyze(c) => (commands::analyze, c),
        Command::Simulate(c) => (commands::simulate, c),
        Command::Train(c) => (commands::train, c),
        Command::Sweep(c) => (commands::sweep_command, c),
        Command::Figures(c) => (commands::figures, c),
    };
    verb(&load(&common)?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
