//! The JSON result document a fit produces: predicted labels, quality
//! metrics when ground truth exists, hyperparameters, the per-sweep
//! objective trace, the learned anchor graph, and timings.
//!
//! Serialization is deterministic: objects serialize with sorted keys and
//! floats use shortest round-trip formatting. Every wall-clock value lives
//! under the single top-level "timing" key, so determinism comparisons drop
//! exactly one field and everything else is byte-stable for a fixed seed.

use std::path::Path;

use nalgebra::DMatrix;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::errors::CliError;
use crate::matio::write_verified;

pub const SCHEMA_VERSION: u32 = 1;

/// Row-major dense matrix block as embedded in result documents.
#[derive(Debug, Deserialize)]
pub struct GraphBlock {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

pub fn document(
    hyper: &dscmc::HyperParams,
    k: usize,
    paper_hessian: bool,
    res: &dscmc::ClusteringResult,
    state: &dscmc::ModelState,
) -> Value {
    let metrics = res.metrics.map(|m| {
        json!({"acc": m.accuracy, "nmi": m.nmi, "fscore": m.fscore, "ari": m.ari})
    });
    let trace: Vec<Value> = res
        .trace
        .records
        .iter()
        .map(|r| {
            json!({
                "iter": r.iter,
                "objective": r.total,
                "reconstruction": r.reconstruction,
                "latent": r.latent,
                "graph_penalty": r.graph_penalty,
                "sparsity_penalty": r.sparsity_penalty,
            })
        })
        .collect();
    let z = &state.graph;
    let mut data = Vec::with_capacity(z.len());
    for i in 0..z.nrows() {
        for j in 0..z.ncols() {
            data.push(z[(i, j)]);
        }
    }
    let sweep_ms: Vec<f64> = res.trace.records.iter().map(|r| r.wall_ms).collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "hyperparameters": {
            "lambda1": hyper.lambda1,
            "lambda2": hyper.lambda2,
            "lambda3": hyper.lambda3,
            "k": k,
            "anchors": hyper.anchors.unwrap_or(k),
            "max_iter": hyper.max_iter,
            "tol": hyper.tol,
            "seed": hyper.seed,
            "mode": hyper.mode.as_str(),
            "paper_hessian": paper_hessian,
            "restarts": hyper.restarts,
        },
        "labels": res.labels,
        "metrics": metrics,
        "trace": trace,
        "graph": {"rows": z.nrows(), "cols": z.ncols(), "data": data},
        "kmeans_objective": res.kmeans_objective,
        "timing": {
            "fit_ms": res.timing.fit_ms,
            "embed_ms": res.timing.embed_ms,
            "kmeans_ms": res.timing.kmeans_ms,
            "total_ms": res.timing.total_ms,
            "sweep_ms": sweep_ms,
        },
    })
}

pub fn write(path: &Path, doc: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(doc)
        .map_err(|e| CliError::io(path, format!("serialization failed: {e}")))?;
    text.push('\n');
    write_verified(path, text.as_bytes())
}

/// Extracts the anchor graph Z from a result document; unknown keys are
/// ignored for forward compatibility.
pub fn read_graph(path: &Path) -> Result<DMatrix<f64>, CliError> {
    #[derive(Deserialize)]
    struct Doc {
        graph: GraphBlock,
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let doc: Doc = serde_json::from_str(&text)
        .map_err(|e| CliError::io(path, format!("bad result document: {e}")))?;
    let g = doc.graph;
    if g.data.len() != g.rows * g.cols {
        return Err(CliError::io(
            path,
            format!("graph block claims {}x{} but holds {} values", g.rows, g.cols, g.data.len()),
        ));
    }
    Ok(DMatrix::from_fn(g.rows, g.cols, |i, j| g.data[i * g.cols + j]))
}

/// Canonical re-serialization with the "timing" key removed: the form two
/// runs of the same seeded experiment must agree on byte for byte.
pub fn strip_timing(text: &str) -> Result<String, CliError> {
    let mut doc: Value = serde_json::from_str(text)
        .map_err(|e| CliError::Io(format!("bad result document: {e}")))?;
    if let Some(obj) = doc.as_object_mut() {
        obj.remove("timing");
    }
    serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))
}
