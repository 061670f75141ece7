//! The `gram` subcommand: exports the complete sample-similarity graph
//! ZᵀZ from a result document, as CSV or as an 8-bit grayscale PGM image.
//! The output is n × n, so n is capped.

use std::path::PathBuf;

use crate::errors::CliError;
use crate::matio::{save_csv, write_verified};
use crate::resultfile::read_graph;

pub const GRAM_SAMPLE_CAP: usize = 5000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum GramFormat {
    Csv,
    Pgm,
}

#[derive(Debug, clap::Args)]
pub struct GramArgs {
    /// Result document holding the anchor graph.
    #[arg(long)]
    pub result: PathBuf,
    /// Output path.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = GramFormat::Csv)]
    pub format: GramFormat,
}

pub fn run(args: GramArgs) -> Result<(), CliError> {
    let z = read_graph(&args.result)?;
    let n = z.ncols();
    if n > GRAM_SAMPLE_CAP {
        return Err(CliError::TooLarge(format!(
            "the Gram export is n x n and n = {n} exceeds the cap of {GRAM_SAMPLE_CAP}; \
             subsample the dataset before exporting"
        )));
    }
    let gram = z.transpose() * &z;
    match args.format {
        GramFormat::Csv => save_csv(&args.out, &gram),
        GramFormat::Pgm => {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &v in gram.iter() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            let span = hi - lo;
            let mut bytes = format!("P5\n{n} {n}\n255\n").into_bytes();
            for i in 0..n {
                for j in 0..n {
                    // A constant matrix has no contrast to scale; render it
                    // black rather than dividing by zero.
                    let level = if span > 0.0 {
                        ((gram[(i, j)] - lo) / span * 255.0).round() as u8
                    } else {
                        0
                    };
                    bytes.push(level);
                }
            }
            write_verified(&args.out, &bytes)
        }
    }
}
