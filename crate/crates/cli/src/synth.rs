//! The `synth` subcommand: generates a labeled Gaussian-blob multi-view
//! dataset on disk, views in the binary matrix format plus a labels file
//! and a manifest that `fit` and `sweep` accept as-is.

use std::path::PathBuf;

use dscmc::datagen::{make_blobs, BlobSpec};

use crate::errors::CliError;
use crate::manifest::{Manifest, MatrixFormat, ViewEntry};
use crate::matio::{save_labels, save_mvdm, write_verified};

#[derive(Debug, clap::Args)]
pub struct SynthArgs {
    /// Sample count.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Cluster count.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Comma-separated per-view feature dimensions, e.g. "8,8".
    #[arg(long, default_value = "16,12")]
    pub dims: String,
    /// Minimum cluster-mean separation in units of sigma.
    #[arg(long, default_value_t = 6.0)]
    pub separation: f64,
    /// Within-cluster standard deviation.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for view files, labels, and the manifest.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: SynthArgs) -> Result<(), CliError> {
    let dims: Vec<usize> = args
        .dims
        .split(',')
        .map(|d| {
            d.trim().parse().map_err(|_| {
                CliError::Usage(format!("bad --dims {:?}: {d:?} is not a positive integer", args.dims))
            })
        })
        .collect::<Result<_, _>>()?;
    let spec = BlobSpec {
        n: args.n,
        k: args.k,
        dims,
        separation: args.separation,
        sigma: args.sigma,
        seed: args.seed,
    };
    let dataset = make_blobs(&spec).map_err(|e| CliError::Usage(e.to_string()))?;

    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    let mut views = Vec::new();
    for (v, x) in dataset.views().iter().enumerate() {
        let name = format!("view_{v}.mvdm");
        save_mvdm(&args.out.join(&name), x)?;
        views.push(ViewEntry {
            path: name,
            rows: x.nrows(),
            cols: x.ncols(),
            format: MatrixFormat::Mvdm,
        });
    }
    let labels = dataset.labels().expect("blob datasets are labeled");
    save_labels(&args.out.join("labels.txt"), labels)?;

    let man = Manifest {
        version: 1,
        views,
        labels_path: Some("labels.txt".into()),
        k: args.k,
    };
    let mut text = serde_json::to_string_pretty(&man)
        .map_err(|e| CliError::Io(format!("manifest serialization failed: {e}")))?;
    text.push('\n');
    write_verified(&args.out.join("manifest.json"), text.as_bytes())
}
