//! `psc`: simplify meshes, encode and decode progressive simplicial
//! complexes, and convert them to and from geometry tokens.
//!
//! Exit status: 0 success, 1 validation failure, 2 I/O or format error,
//! 3 configuration error.

mod commands;
mod report;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::CliError;
use report::ReportFormat;

/// Thread count for commands that work on several files at once.
const THREADS_ENV: &str = "PSC_THREADS";

#[derive(Debug, Parser)]
#[command(name = "psc", version, about = "Level-of-detail meshes by reversing simplification")]
struct Cli {
    /// Report style printed on stdout.
    #[arg(long, global = true, value_enum, default_value = "text")]
    report: ReportFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    Simplify(commands::SimplifyArgs),
    Encode(commands::EncodeArgs),
    Decode(commands::DecodeArgs),
    Validate(commands::ValidateArgs),
    Tokenize(commands::TokenizeArgs),
    Detokenize(commands::DetokenizeArgs),
    BpeTrain(commands::BpeTrainArgs),
    Generate(commands::GenerateArgs),
    Stats(commands::StatsArgs),
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::config(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::config(e.to_string()))
}

fn run(cli: Cli) -> Result<report::Report, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Simplify(a) => commands::simplify(a),
        Command::Encode(a) => commands::encode(a),
        Command::Decode(a) => commands::decode(a),
        Command::Validate(a) => commands::validate(a),
        Command::Tokenize(a) => commands::tokenize(a),
        Command::Detokenize(a) => commands::detokenize(a),
        Command::BpeTrain(a) => commands::bpe_train(a),
        Command::Generate(a) => commands::generate(a),
        Command::Stats(a) => commands::stats(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    let format = cli.report;
    match run(cli) {
        Ok(report) => {
            print!("{}", report.render(format));
            ExitCode::SUCCESS
        }
        Err(e) => {
            if let Some(report) = &e.report {
                print!("{}", report.render(format));
            }
            eprintln!("error: {}", e.message);
            ExitCode::from(e.kind.code())
        }
    }
}
