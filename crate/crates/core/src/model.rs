//! Shared domain types: the dataset, hyperparameters, optimizer state, the
//! convergence trace, and the end-to-end clustering result.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numerics::ensure_finite;

/// Tolerances for the state invariants checked by [`ModelState::check_invariants`].
pub const ORTHONORMALITY_TOL: f64 = 1e-8;
pub const SIMPLEX_COLUMN_TOL: f64 = 1e-10;

/// V dense feature matrices over the same n samples, columns = samples,
/// plus the target cluster count and optional ground-truth labels.
/// Immutable after construction; `new` validates every invariant.
#[derive(Clone, Debug)]
pub struct MultiViewDataset {
    views: Vec<DMatrix<f64>>,
    labels: Option<Vec<usize>>,
    k: usize,
}

impl MultiViewDataset {
    pub fn new(views: Vec<DMatrix<f64>>, labels: Option<Vec<usize>>, k: usize) -> Result<Self> {
        let d = MultiViewDataset { views, labels, k };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.views.is_empty() {
            return Err(Error::DimensionMismatch("dataset has no views".into()));
        }
        if self.k < 2 {
            return Err(Error::InvalidConfig(format!(
                "cluster count must be at least 2, got {}",
                self.k
            )));
        }
        let n = self.views[0].ncols();
        for (v, x) in self.views.iter().enumerate() {
            if x.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "view 0 has {n} columns but view {v} has {}",
                    x.ncols()
                )));
            }
            if x.nrows() == 0 {
                return Err(Error::DimensionMismatch(format!("view {v} has no rows")));
            }
            ensure_finite(x, &format!("view {v}"))?;
        }
        if n < self.k {
            return Err(Error::DimensionMismatch(format!(
                "need at least k = {} samples, got {n}",
                self.k
            )));
        }
        if let Some(labels) = &self.labels {
            if labels.len() != n {
                return Err(Error::BadLabels(format!(
                    "label vector length {} does not match sample count {n}",
                    labels.len()
                )));
            }
            let max = *labels.iter().max().expect("n >= k >= 2");
            if max >= self.k {
                return Err(Error::BadLabels(format!(
                    "label {max} out of range for k = {}",
                    self.k
                )));
            }
            let mut seen = vec![false; max + 1];
            for &l in labels {
                seen[l] = true;
            }
            if let Some(hole) = seen.iter().position(|&s| !s) {
                return Err(Error::BadLabels(format!(
                    "class {hole} has no samples but class {max} is referenced"
                )));
            }
        }
        Ok(())
    }

    pub fn views(&self) -> &[DMatrix<f64>] {
        &self.views
    }

    pub fn view(&self, v: usize) -> &DMatrix<f64> {
        &self.views[v]
    }

    pub fn n_views(&self) -> usize {
        self.views.len()
    }

    pub fn n(&self) -> usize {
        self.views[0].ncols()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    /// Per-view feature dimensions d_v.
    pub fn dims(&self) -> Vec<usize> {
        self.views.iter().map(|x| x.nrows()).collect()
    }

    /// Total feature dimension c = Σ_v d_v.
    pub fn total_dim(&self) -> usize {
        self.views.iter().map(|x| x.nrows()).sum()
    }
}

/// Validates every dataset invariant; identical to [`MultiViewDataset::validate`].
pub fn validate_dataset(d: &MultiViewDataset) -> Result<()> {
    d.validate()
}

/// Ablation switches: which of the two co-training branches participate in
/// the objective and the sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AblationMode {
    /// Both branches plus the ℓ2,1 penalty.
    Full,
    /// Reconstruction branch only: the transform update is skipped and the
    /// λ1/λ3 terms leave the objective.
    ProjectionOnly,
    /// Transform branch only: the projection update is skipped and the
    /// reconstruction term leaves the objective.
    TransformOnly,
    /// Full model with ‖W‖_F² replacing the ℓ2,1 penalty.
    FrobeniusPenalty,
}

impl AblationMode {
    /// Whether the per-view reconstruction term Σ‖X − P(AZ)‖² participates.
    pub fn reconstruction_active(self) -> bool {
        self != AblationMode::TransformOnly
    }

    /// Whether the latent-consistency and sparsity terms participate.
    pub fn latent_active(self) -> bool {
        self != AblationMode::ProjectionOnly
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AblationMode::Full => "full",
            AblationMode::ProjectionOnly => "only-p",
            AblationMode::TransformOnly => "only-w",
            AblationMode::FrobeniusPenalty => "frobenius-w",
        }
    }
}

impl std::str::FromStr for AblationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(AblationMode::Full),
            "only-p" => Ok(AblationMode::ProjectionOnly),
            "only-w" => Ok(AblationMode::TransformOnly),
            "frobenius-w" => Ok(AblationMode::FrobeniusPenalty),
            other => Err(Error::InvalidConfig(format!(
                "unknown mode {other:?}; expected full, only-p, only-w, or frobenius-w"
            ))),
        }
    }
}

impl std::fmt::Display for AblationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Solver hyperparameters. `anchors = None` means m = k.
#[derive(Clone, Debug)]
pub struct HyperParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub anchors: Option<usize>,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    pub mode: AblationMode,
    pub restarts: usize,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            lambda1: 1.0,
            lambda2: 1.0,
            lambda3: 1.0,
            anchors: None,
            max_iter: 20,
            tol: 1e-6,
            seed: 0,
            mode: AblationMode::Full,
            restarts: 50,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        for (name, l) in [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("lambda3", self.lambda3),
        ] {
            if !(l.is_finite() && l >= 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and nonnegative, got {l}"
                )));
            }
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be positive".into()));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tol must be finite and nonnegative, got {}",
                self.tol
            )));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be positive".into()));
        }
        if self.anchors == Some(0) {
            return Err(Error::InvalidConfig("anchor count must be positive".into()));
        }
        Ok(())
    }

    /// Resolves the anchor count m for a dataset with k clusters. The anchor
    /// basis A is k × m with AᵀA = I_m, which is only satisfiable for m ≤ k.
    pub fn anchor_count(&self, k: usize) -> Result<usize> {
        let m = self.anchors.unwrap_or(k);
        if m == 0 {
            return Err(Error::InvalidConfig("anchor count must be positive".into()));
        }
        if m > k {
            return Err(Error::InvalidConfig(format!(
                "anchor count {m} exceeds cluster count {k}; the anchor basis must be \
                 column-orthonormal, which requires at most k anchors"
            )));
        }
        Ok(m)
    }
}

/// The four optimization variables plus the sweep counter. Shapes:
/// projections[v] d_v × k, transforms[v] k × d_v, anchors k × m, graph m × n.
#[derive(Clone, Debug)]
pub struct ModelState {
    pub projections: Vec<DMatrix<f64>>,
    pub transforms: Vec<DMatrix<f64>>,
    pub anchors: DMatrix<f64>,
    pub graph: DMatrix<f64>,
    pub iter: usize,
}

impl ModelState {
    pub fn n_views(&self) -> usize {
        self.projections.len()
    }

    /// Checks orthonormality of every projection and of the anchor basis,
    /// and that every graph column lies on the simplex, at the stated
    /// tolerances.
    pub fn check_invariants(&self) -> Result<()> {
        for (v, p) in self.projections.iter().enumerate() {
            let k = p.ncols();
            let gram = p.transpose() * p;
            let err = (gram - DMatrix::identity(k, k)).amax();
            if err > ORTHONORMALITY_TOL {
                return Err(Error::InvariantViolation(format!(
                    "projection {v} is not orthonormal (deviation {err:.3e})"
                )));
            }
        }
        let m = self.anchors.ncols();
        let gram = self.anchors.transpose() * &self.anchors;
        let err = (gram - DMatrix::identity(m, m)).amax();
        if err > ORTHONORMALITY_TOL {
            return Err(Error::InvariantViolation(format!(
                "anchor basis is not orthonormal (deviation {err:.3e})"
            )));
        }
        for j in 0..self.graph.ncols() {
            let col = self.graph.column(j);
            if col.iter().any(|&z| z < 0.0) {
                return Err(Error::InvariantViolation(format!(
                    "graph column {j} has a negative entry"
                )));
            }
            let sum: f64 = col.iter().sum();
            if (sum - 1.0).abs() > SIMPLEX_COLUMN_TOL {
                return Err(Error::InvariantViolation(format!(
                    "graph column {j} sums to {sum}, not 1"
                )));
            }
        }
        Ok(())
    }
}

/// One record per completed sweep.
#[derive(Clone, Debug)]
pub struct TraceRecord {
    pub iter: usize,
    pub total: f64,
    /// Σ_v ‖X^v − P^v(AZ)‖_F²
    pub reconstruction: f64,
    /// λ1 Σ_v ‖W^vX^v − AZ‖_F²
    pub latent: f64,
    /// λ2 ‖Z‖_F²
    pub graph_penalty: f64,
    /// λ3 Σ_v penalty(W^v) (ℓ2,1, or ‖·‖_F² under the Frobenius ablation)
    pub sparsity_penalty: f64,
    pub wall_ms: f64,
}

/// Objective values recorded after every sweep.
#[derive(Clone, Debug, Default)]
pub struct ConvergenceTrace {
    pub records: Vec<TraceRecord>,
}

impl ConvergenceTrace {
    /// Sum consistency of each record and monotone decrease across records.
    pub fn check_invariants(&self) -> Result<()> {
        for r in &self.records {
            let sum = r.reconstruction + r.latent + r.graph_penalty + r.sparsity_penalty;
            if (sum - r.total).abs() > 1e-9 * (1.0 + r.total.abs()) {
                return Err(Error::InvariantViolation(format!(
                    "trace record {}: terms sum to {sum} but total is {}",
                    r.iter, r.total
                )));
            }
        }
        for w in self.records.windows(2) {
            if w[1].total > w[0].total + 1e-8 * (1.0 + w[0].total.abs()) {
                return Err(Error::InvariantViolation(format!(
                    "objective rose from {} (iter {}) to {} (iter {})",
                    w[0].total, w[0].iter, w[1].total, w[1].iter
                )));
            }
        }
        Ok(())
    }

    /// Whether the recorded objective sequence reached the given relative
    /// tolerance between two consecutive sweeps.
    pub fn converged(&self, tol: f64) -> bool {
        self.records.windows(2).any(|w| {
            (w[1].total - w[0].total).abs() / w[0].total.max(1e-12) < tol
        })
    }
}

/// The four external quality indicators.
#[derive(Clone, Copy, Debug)]
pub struct MetricScores {
    pub accuracy: f64,
    pub nmi: f64,
    pub fscore: f64,
    pub ari: f64,
}

/// Wall-clock timings of the pipeline stages, milliseconds.
#[derive(Clone, Copy, Debug, Default)]
pub struct StageTimings {
    pub fit_ms: f64,
    pub embed_ms: f64,
    pub kmeans_ms: f64,
    pub total_ms: f64,
}

/// Output of the full pipeline: labels, the spectral embedding they were
/// computed from, quality metrics when ground truth is available, the
/// solver trace, and the selected k-means objective.
#[derive(Clone, Debug)]
pub struct ClusteringResult {
    pub labels: Vec<usize>,
    pub embedding: DMatrix<f64>,
    pub metrics: Option<MetricScores>,
    pub trace: ConvergenceTrace,
    pub kmeans_objective: f64,
    pub timing: StageTimings,
}
