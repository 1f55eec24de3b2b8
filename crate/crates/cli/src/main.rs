//! `twr`: run trust simulations, compute indirect trust, synthesise datasets
//! and evaluate recommenders from the command line.
//!
//! Exit status is 0 on success, 1 for usage errors and 2 for runtime
//! failures. Errors are reported on stderr as a single JSON line.

mod commands;
mod output;
mod settings;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use settings::Settings;

#[derive(Debug, Parser)]
#[command(name = "twr", version, about = "Personalised trust metric toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat TOML file with parameter values; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for output files; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(flatten)]
    settings: Settings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate trust formation, over a grid of degrees and signalling rates.
    Simulate,
    /// Compute indirect trust and its normalisation for an edge-list graph.
    Trust,
    /// Load (or synthesise), clean, split and score TW, CF and SA.
    Evaluate,
    /// Write a synthetic ratings and trust dataset.
    Synth,
    /// Iterate the undamped recursion and classify where it ends up.
    DemoNaive,
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            kind: "usage",
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self {
            code: 2,
            kind: "io",
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<trustweb::Error> for CliError {
    fn from(e: trustweb::Error) -> Self {
        let code = if matches!(e, trustweb::Error::InvalidParameter(_)) { 1 } else { 2 };
        Self {
            code,
            kind: e.kind(),
            message: e.to_string(),
        }
    }
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    error: &'a str,
    message: String,
}

fn report(err: &CliError) {
    let line = ErrorLine {
        error: err.kind,
        message: err.message.replace('\n', " "),
    };
    eprintln!("{}", serde_json::to_string(&line).expect("error line serialises"));
}

fn run(cli: Cli) -> Result<(), CliError> {
    let settings = cli.settings.layered(cli.config.as_deref())?;
    let sink = output::Sink::new(cli.out)?;
    match cli.command {
        Command::Simulate => commands::simulate(&settings, &sink, cli.format),
        Command::Trust => commands::trust(&settings, &sink, cli.format),
        Command::Evaluate => commands::evaluate(&settings, &sink, cli.format),
        Command::Synth => commands::synth(&settings, &sink, cli.format),
        Command::DemoNaive => commands::demo_naive(&settings, &sink, cli.format),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            report(&CliError::usage(first.trim_start_matches("error: ")));
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::from(e.code)
        }
    }
}
