//! `gthbe`: resource estimates for first-quantized block encodings with
//! GTH pseudopotentials.

mod commands;
mod golden;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};

use clap::{Parser, Subcommand};
use serde_json::json;
use thiserror::Error;

use commands::{InterpArgs, LambdaArgs};
use input::{read_species_file, SpeciesResolver, SystemArgs};
use output::{Document, OutputArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] gthbe::Error),
    #[error("output: {0}")]
    Output(String),
    #[error("{0} golden cell(s) outside tolerance")]
    GoldenMismatch(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(gthbe::Error::Infeasible(_)) => 3,
            CliError::GoldenMismatch(_) => 4,
            _ => 2,
        }
    }

    fn guidance(&self) -> Option<&'static str> {
        match self {
            CliError::Core(gthbe::Error::Infeasible(_)) => {
                Some("hint: use --strategy exact (or relaxation for an upper bound), or a smaller grid")
            }
            _ => None,
        }
    }
}

static QUIET: AtomicBool = AtomicBool::new(false);

/// Reports progress on standard error; never touches the report bytes.
pub fn progress(msg: &str) {
    if !QUIET.load(Ordering::Relaxed) {
        eprintln!("[gthbe] {msg}");
    }
}

#[derive(Debug, Parser)]
#[command(name = "gthbe", version, about = "Block-encoding resource estimates for GTH pseudopotential Hamiltonians")]
struct Cli {
    /// Suppress progress messages on standard error.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Geometry, box preparation, λ, block-encoding ledger and QPE totals.
    Estimate {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        lambda: LambdaArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// λ components.
    Lambda {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        lambda: LambdaArgs,
        /// Include the per-species breakdown (the CSV rows in csv mode).
        #[arg(long)]
        per_species: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Block-encoding Toffoli cost.
    Cost {
        #[command(flatten)]
        system: SystemArgs,
        /// Include the itemized ledger (the CSV rows in csv mode).
        #[arg(long)]
        ledger: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Phase-estimation Toffoli total ⌈λπ/(2ε)⌉·C_BE.
    Qpe {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        lambda: LambdaArgs,
        /// Use this λ instead of computing it.
        #[arg(long = "lambda-value")]
        lambda_value: Option<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Nested-box preparation of 1/‖k_ν‖ and its success probability.
    Boxes {
        #[command(flatten)]
        system: SystemArgs,
        /// Search shifts 0..=MAX for the best success probability.
        #[arg(long, value_name = "MAX")]
        optimize: Option<u32>,
        /// Count generated bitstrings (including negative zeros) instead of
        /// distinct Miller vectors.
        #[arg(long)]
        signed: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Accuracy and cost of the exponential interpolation tables.
    InterpError {
        #[command(flatten)]
        args: InterpArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Inspect GTH pseudopotential parameters.
    Gth {
        #[command(subcommand)]
        action: GthAction,
    },
    /// Compare against a bundled published table (exit 4 on mismatch).
    CompareGolden {
        #[command(flatten)]
        args: golden::GoldenArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Subcommand)]
enum GthAction {
    /// Print a species in GTH text form.
    Show {
        label: String,
        /// GTH file whose species override the bundled ones.
        #[arg(long)]
        species: Option<PathBuf>,
        /// Print JSON instead of GTH text.
        #[arg(long)]
        json: bool,
    },
    /// Parse and validate a GTH file, printing its species as JSON.
    Parse { file: PathBuf },
}

fn gth(action: &GthAction) -> Result<(), CliError> {
    let to_json = |v: serde_json::Value| -> Result<(), CliError> {
        let doc = Document::new(v);
        output::emit(&doc, &OutputArgs { format: output::Format::Json, output: None })
    };
    match action {
        GthAction::Show { label, species, json } => {
            let sp = SpeciesResolver::new(species.as_deref())?.resolve(label)?;
            if *json {
                to_json(serde_json::to_value(&sp).map_err(|e| CliError::Output(e.to_string()))?)
            } else {
                print!("{}", sp.to_gth_text());
                Ok(())
            }
        }
        GthAction::Parse { file } => {
            let all = read_species_file(file)?;
            for s in &all {
                s.validate()?;
            }
            to_json(json!({ "file": file, "species": all }))
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Estimate { system, lambda, out } => output::emit(&commands::estimate(system, lambda)?, out),
        Command::Lambda { system, lambda, per_species, out } => {
            output::emit(&commands::lambda(system, lambda, *per_species)?, out)
        }
        Command::Cost { system, ledger, out } => output::emit(&commands::cost(system, *ledger)?, out),
        Command::Qpe { system, lambda, lambda_value, out } => {
            output::emit(&commands::qpe(system, lambda, *lambda_value)?, out)
        }
        Command::Boxes { system, optimize, signed, out } => {
            output::emit(&commands::boxes(system, *optimize, *signed)?, out)
        }
        Command::InterpError { args, out } => output::emit(&commands::interp_error(args)?, out),
        Command::Gth { action } => gth(action),
        Command::CompareGolden { args, out } => {
            let (doc, failed) = golden::compare(args)?;
            output::emit(&doc, out)?;
            if failed > 0 {
                return Err(CliError::GoldenMismatch(failed));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    QUIET.store(cli.quiet, Ordering::Relaxed);
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(h) = e.guidance() {
                eprintln!("{h}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
