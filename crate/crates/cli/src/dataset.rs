//! Manifest-driven dataset loading shared by `fit` and `sweep`, plus the
//! solver flags those subcommands have in common.

use std::path::{Path, PathBuf};

use dscmc::{AblationMode, HyperParams, MultiViewDataset, SolverConfig};

use crate::errors::CliError;
use crate::manifest::{self, Manifest};
use crate::matio;

/// Loads every view named by the manifest, cross-checks shapes against the
/// declared ones, and attaches labels when present.
pub fn load_dataset(manifest_path: &Path) -> Result<(MultiViewDataset, Manifest), CliError> {
    let (man, base) = manifest::load(manifest_path)?;
    let mut views = Vec::with_capacity(man.views.len());
    for (i, entry) in man.views.iter().enumerate() {
        let path = base.join(&entry.path);
        let m = matio::load_matrix(&path, entry.format)?;
        if m.nrows() != entry.rows || m.ncols() != entry.cols {
            return Err(CliError::io(
                &path,
                format!(
                    "view {i}: manifest declares {}x{}, file holds {}x{}",
                    entry.rows,
                    entry.cols,
                    m.nrows(),
                    m.ncols()
                ),
            ));
        }
        views.push(m);
    }
    let labels = match &man.labels_path {
        Some(rel) => Some(matio::load_labels(&base.join(rel))?),
        None => None,
    };
    let dataset = MultiViewDataset::new(views, labels, man.k)
        .map_err(|e| CliError::io(manifest_path, format!("inconsistent dataset: {e}")))?;
    Ok((dataset, man))
}

/// Solver flags shared verbatim between `fit` and `sweep`.
#[derive(Clone, Debug, clap::Args)]
pub struct SolverFlags {
    /// Anchor count m; defaults to the manifest's k (the pipeline needs m = k).
    #[arg(long)]
    pub anchors: Option<usize>,
    /// Maximum alternating sweeps.
    #[arg(long, default_value_t = 20)]
    pub max_iter: usize,
    /// Relative objective-change stopping tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Seed for initialization and k-means restarts.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Objective variant: full, only-p, only-w, or frobenius-w.
    #[arg(long, default_value = "full")]
    pub mode: String,
    /// Use the uniform latent coefficient in the graph update's diagonal
    /// Hessian instead of the derived anchor-count coefficient.
    #[arg(long)]
    pub paper_hessian: bool,
    /// k-means restarts.
    #[arg(long, default_value_t = 50)]
    pub restarts: usize,
}

impl SolverFlags {
    /// Validates the flags against the dataset's k and produces a solver
    /// config with the given penalty weights.
    pub fn config(&self, k: usize, lambdas: (f64, f64, f64)) -> Result<SolverConfig, CliError> {
        let mode: AblationMode =
            self.mode.parse().map_err(|e: dscmc::Error| CliError::Usage(e.to_string()))?;
        if let Some(m) = self.anchors {
            if m != k {
                return Err(CliError::Usage(format!(
                    "--anchors {m} is incompatible with k = {k}: the anchor basis is a k x m \
                     column-orthonormal matrix (so m <= k) and the spectral embedding needs k \
                     graph directions (so m >= k); use --anchors {k} or omit the flag"
                )));
            }
        }
        let hyper = HyperParams {
            lambda1: lambdas.0,
            lambda2: lambdas.1,
            lambda3: lambdas.2,
            anchors: self.anchors,
            max_iter: self.max_iter,
            tol: self.tol,
            seed: self.seed,
            mode,
            restarts: self.restarts,
        };
        hyper.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        let mut cfg = SolverConfig::new(hyper);
        cfg.record_trace = true;
        cfg.paper_hessian = self.paper_hessian;
        Ok(cfg)
    }
}

/// Runs the pipeline and renders the result document.
pub fn fit_document(
    dataset: &MultiViewDataset,
    cfg: &SolverConfig,
) -> Result<serde_json::Value, CliError> {
    let (res, state) =
        dscmc::cluster(dataset, cfg).map_err(|e| CliError::Solver(e.to_string()))?;
    Ok(crate::resultfile::document(
        &cfg.hyper,
        dataset.k(),
        cfg.paper_hessian,
        &res,
        &state,
    ))
}

pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
