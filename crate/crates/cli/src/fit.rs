//! The `fit` subcommand: one full pipeline run on a manifest-described
//! dataset, one result document.

use std::path::PathBuf;

use crate::dataset::{fit_document, load_dataset, SolverFlags};
use crate::errors::CliError;
use crate::resultfile;

#[derive(Debug, clap::Args)]
pub struct FitArgs {
    /// Path to the dataset manifest.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Reconstruction-consistency weight.
    #[arg(long)]
    pub lambda1: f64,
    /// Graph Frobenius penalty weight.
    #[arg(long)]
    pub lambda2: f64,
    /// Transform column-sparsity weight.
    #[arg(long)]
    pub lambda3: f64,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// Result document path.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: FitArgs) -> Result<(), CliError> {
    let (dataset, _man) = load_dataset(&args.manifest)?;
    let cfg = args.solver.config(dataset.k(), (args.lambda1, args.lambda2, args.lambda3))?;
    let doc = fit_document(&dataset, &cfg)?;
    resultfile::write(&args.out, &doc)
}
