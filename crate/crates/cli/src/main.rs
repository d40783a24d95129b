//! `hostclass` — file-driven workflow for the two-stage hosting-type
//! classifier: generate synthetic corpora, extract features, label ground
//! truth, train and evaluate forests, classify IP batches and aggregate
//! the malicious-hosting study reports.
//!
//! Every subcommand writes a `run_manifest.json` capturing the resolved
//! configuration plus SHA-256 digests of all inputs and outputs; runs
//! with equal manifests produce byte-identical outputs.

mod args;
mod commands;
mod manifest;

use clap::Parser;

use args::{Cli, Command};

/// Error with a stable machine-parsable code.
pub struct CliError {
    pub code: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(code: &'static str, err: impl std::fmt::Display) -> Self {
        CliError { code, message: err.to_string() }
    }
}

pub type CliResult = Result<(), CliError>;

trait Coded<T> {
    fn code(self, code: &'static str) -> Result<T, CliError>;
}

impl<T, E: std::fmt::Display> Coded<T> for Result<T, E> {
    fn code(self, code: &'static str) -> Result<T, CliError> {
        self.map_err(|e| CliError::new(code, e))
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        let msg = err.message.replace(['\n', '\r'], " ");
        eprintln!("error code={} msg={:?}", err.code, msg);
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> CliResult {
    let config = args::load_config(cli.config.as_deref())?;
    let global = cli.global.merged(config.global.clone().unwrap_or_default());
    if let Some(jobs) = global.jobs {
        // ignore failure when a pool already exists (e.g. under tests)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match cli.command {
        Command::Synth(a) => commands::synth::run(a.merged(config.synth.unwrap_or_default()), &global),
        Command::Features(a) => {
            commands::features::run(a.merged(config.features.unwrap_or_default()), &global)
        }
        Command::Label(a) => commands::label::run(a.merged(config.label.unwrap_or_default()), &global),
        Command::Train(a) => commands::train::run(a.merged(config.train.unwrap_or_default()), &global),
        Command::Eval(a) => commands::eval::run(a.merged(config.eval.unwrap_or_default()), &global),
        Command::Classify(a) => {
            commands::classify::run(a.merged(config.classify.unwrap_or_default()), &global)
        }
        Command::Analyze(a) => {
            commands::analyze::run(a.merged(config.analyze.unwrap_or_default()), &global)
        }
    }
}
