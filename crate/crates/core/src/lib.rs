//! Multi-view clustering through a co-trained pair of view-specific maps:
//! orthonormal projections that reconstruct each view from a shared anchor
//! graph, and sparse transforms that align each view with the latent
//! anchor space. The crate provides the alternating solver, the spectral
//! embedding and k-means stage on top of the learned graph, external
//! cluster quality metrics, and seeded synthetic data generators.
//!
//! The usual flow is [`cluster`]: fit the factorization, embed the anchor
//! graph, run k-means, and score against ground truth when the dataset
//! carries labels. Every stage is deterministic given the seed, bit for
//! bit, regardless of thread count.

pub mod datagen;
pub mod embedding;
pub mod error;
pub mod metrics;
pub mod model;
pub mod numerics;
pub mod rng;
pub mod solver;

use std::time::Instant;

pub use embedding::KMeansModel;
pub use error::{Error, Result};
pub use model::{
    AblationMode, ClusteringResult, ConvergenceTrace, HyperParams, MetricScores, ModelState,
    MultiViewDataset, StageTimings, TraceRecord,
};
pub use solver::{fit, init_state, objective, SolverConfig};

/// Full pipeline: alternating fit, spectral embedding of the learned
/// graph, restarted k-means, and (when the dataset has labels) the four
/// quality metrics. Returns the clustering alongside the fitted model
/// state. The embedding stage needs as many anchors as clusters, so
/// configs with fewer anchors than k are rejected up front.
pub fn cluster(
    d: &MultiViewDataset,
    cfg: &SolverConfig,
) -> Result<(ClusteringResult, ModelState)> {
    let start = Instant::now();
    let k = d.k();
    let m = cfg.hyper.anchor_count(k)?;
    if m < k {
        return Err(Error::InvalidConfig(format!(
            "the spectral embedding needs k = {k} right singular vectors of the graph, \
             which requires at least k anchors; got {m}"
        )));
    }
    let (state, trace) = solver::fit(d, cfg)?;
    let fit_ms = start.elapsed().as_secs_f64() * 1e3;

    let embed_start = Instant::now();
    let embedding = embedding::spectral_embed(&state.graph, k)?;
    let embed_ms = embed_start.elapsed().as_secs_f64() * 1e3;

    let kmeans_start = Instant::now();
    let km = embedding::kmeans(&embedding, k, cfg.hyper.restarts, cfg.hyper.seed)?;
    let kmeans_ms = kmeans_start.elapsed().as_secs_f64() * 1e3;

    let metrics = match d.labels() {
        Some(y) => Some(MetricScores {
            accuracy: metrics::accuracy(y, &km.labels)?,
            nmi: metrics::nmi(y, &km.labels)?,
            fscore: metrics::pairwise_fscore(y, &km.labels)?,
            ari: metrics::ari(y, &km.labels)?,
        }),
        None => None,
    };
    let result = ClusteringResult {
        labels: km.labels,
        embedding,
        metrics,
        trace,
        kmeans_objective: km.inertia,
        timing: StageTimings {
            fit_ms,
            embed_ms,
            kmeans_ms,
            total_ms: start.elapsed().as_secs_f64() * 1e3,
        },
    };
    Ok((result, state))
}
