//! Binary entry point: flag parsing, dispatch, and the exit-code taxonomy
//! (0 success, 2 bad flags, 3 IO/parse, 4 solver, 5 over-cap export).

use clap::{Parser, Subcommand};

use dscmc_cli::{configure_threads, fit, gram, sweep, synth};

#[derive(Parser)]
#[command(
    name = "dscmc",
    version,
    about = "Dual-space co-trained multi-view clustering experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the model on a manifest-described dataset and write a result document.
    Fit(fit::FitArgs),
    /// Fit every cell of a penalty-weight grid and write a summary table.
    Sweep(sweep::SweepArgs),
    /// Export the complete similarity graph ZᵀZ from a result document.
    Gram(gram::GramArgs),
    /// Generate a synthetic labeled multi-view dataset plus manifest.
    Synth(synth::SynthArgs),
}

fn main() {
    let cli = Cli::parse();
    let outcome = configure_threads().and_then(|()| match cli.command {
        Command::Fit(args) => fit::run(args),
        Command::Sweep(args) => sweep::run(args),
        Command::Gram(args) => gram::run(args),
        Command::Synth(args) => synth::run(args),
    });
    if let Err(e) = outcome {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
