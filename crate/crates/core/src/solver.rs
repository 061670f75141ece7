//! The alternating optimizer.
//!
//! One sweep updates the blocks in a fixed order: per-view projections P^v,
//! the shared anchor basis A, per-view transforms W^v, then the anchor graph
//! Z. Each block has a closed-form or projection solution:
//!
//! * P^v and A are orthogonal Procrustes problems on their respective
//!   gradient targets; A's target accumulates over views in fixed order.
//! * W^v solves a ridge-like SPD system in which the ℓ2,1 penalty appears
//!   through IRLS weights phi frozen from the pre-update W^v (one reweight
//!   per sweep); the `frobenius-w` ablation replaces phi with ones.
//! * Z factors into independent per-column simplex projections because the
//!   quadratic coefficient is a scaled identity once A and P are
//!   column-orthonormal. The derived coefficient is V(1 + λ1) + λ2; the
//!   config flag `paper_hessian` swaps in the alternative V + λ1 + λ2 for
//!   comparison runs.
//!
//! With the reconstruction branch or latent branch disabled (ablations),
//! the corresponding terms leave both the objective and every update
//! target. All updates are bitwise deterministic and independent of the
//! parallelism flags: per-view and per-column sub-problems share nothing,
//! and cross-view sums always accumulate in view order.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    AblationMode, ConvergenceTrace, HyperParams, ModelState, MultiViewDataset, TraceRecord,
};
use crate::numerics::{
    l21_norm, l21_reweight, orthogonal_procrustes, project_simplex_into, spd_solve, svd_thin,
};

/// Floor for the IRLS reweighting of zero columns.
pub const REWEIGHT_EPS: f64 = 1e-8;

/// How `fit` runs: hyperparameters plus plumbing switches.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub hyper: HyperParams,
    /// Record a `TraceRecord` after every sweep.
    pub record_trace: bool,
    /// Update per-view blocks (P, W) data-parallel.
    pub parallel_views: bool,
    /// Update graph columns data-parallel.
    pub parallel_columns: bool,
    /// Use the alternative graph-update coefficient V + λ1 + λ2 instead of
    /// the derived V(1 + λ1) + λ2.
    pub paper_hessian: bool,
}

impl SolverConfig {
    pub fn new(hyper: HyperParams) -> Self {
        SolverConfig {
            hyper,
            record_trace: true,
            parallel_views: true,
            parallel_columns: true,
            paper_hessian: false,
        }
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig::new(HyperParams::default())
    }
}

fn check_shapes(d: &MultiViewDataset, s: &ModelState) -> Result<()> {
    let v = d.n_views();
    if s.projections.len() != v || s.transforms.len() != v {
        return Err(Error::DimensionMismatch(format!(
            "state holds {} projections / {} transforms for {v} views",
            s.projections.len(),
            s.transforms.len()
        )));
    }
    let k = d.k();
    if s.anchors.nrows() != k {
        return Err(Error::DimensionMismatch(format!(
            "anchor basis has {} rows, expected k = {k}",
            s.anchors.nrows()
        )));
    }
    let m = s.anchors.ncols();
    if s.graph.shape() != (m, d.n()) {
        return Err(Error::DimensionMismatch(format!(
            "graph is {}x{}, expected {m}x{}",
            s.graph.nrows(),
            s.graph.ncols(),
            d.n()
        )));
    }
    for (i, x) in d.views().iter().enumerate() {
        let dv = x.nrows();
        if s.projections[i].shape() != (dv, k) {
            return Err(Error::DimensionMismatch(format!(
                "projection {i} is {}x{}, expected {dv}x{k}",
                s.projections[i].nrows(),
                s.projections[i].ncols()
            )));
        }
        if s.transforms[i].shape() != (k, dv) {
            return Err(Error::DimensionMismatch(format!(
                "transform {i} is {}x{}, expected {k}x{dv}",
                s.transforms[i].nrows(),
                s.transforms[i].ncols()
            )));
        }
    }
    Ok(())
}

/// Objective value and the four terms it decomposes into:
/// [reconstruction, latent consistency, graph penalty, sparsity penalty].
/// Terms excluded by the ablation mode are zero.
pub fn objective(
    d: &MultiViewDataset,
    s: &ModelState,
    h: &HyperParams,
) -> Result<(f64, [f64; 4])> {
    check_shapes(d, s)?;
    let az = &s.anchors * &s.graph;
    let mut reconstruction = 0.0;
    let mut latent = 0.0;
    let mut sparsity = 0.0;
    for v in 0..d.n_views() {
        let x = d.view(v);
        if h.mode.reconstruction_active() {
            reconstruction += (x - &s.projections[v] * &az).norm_squared();
        }
        if h.mode.latent_active() {
            latent += (&s.transforms[v] * x - &az).norm_squared();
            sparsity += match h.mode {
                AblationMode::FrobeniusPenalty => s.transforms[v].norm_squared(),
                _ => l21_norm(&s.transforms[v])?,
            };
        }
    }
    latent *= h.lambda1;
    sparsity *= h.lambda3;
    let graph_penalty = h.lambda2 * s.graph.norm_squared();
    let total = reconstruction + latent + graph_penalty + sparsity;
    Ok((total, [reconstruction, latent, graph_penalty, sparsity]))
}

fn map_views<F>(parallel: bool, n_views: usize, f: F) -> Result<Vec<DMatrix<f64>>>
where
    F: Fn(usize) -> Result<DMatrix<f64>> + Sync + Send,
{
    if parallel {
        (0..n_views).into_par_iter().map(f).collect()
    } else {
        (0..n_views).map(f).collect()
    }
}

/// Replaces every projection with the Procrustes maximizer of its view:
/// P^v = orthogonal_procrustes(X^v (AZ)ᵀ).
pub fn update_p(d: &MultiViewDataset, s: &mut ModelState, h: &HyperParams) -> Result<()> {
    update_p_with(d, s, h, false)
}

pub fn update_p_with(
    d: &MultiViewDataset,
    s: &mut ModelState,
    _h: &HyperParams,
    parallel: bool,
) -> Result<()> {
    check_shapes(d, s)?;
    let azt = (&s.anchors * &s.graph).transpose();
    s.projections = map_views(parallel, d.n_views(), |v| {
        orthogonal_procrustes(&(d.view(v) * &azt))
    })?;
    Ok(())
}

/// Replaces the anchor basis with the Procrustes maximizer of the summed
/// target B = Σ_v (P^vᵀ X^v Zᵀ + λ1 W^v X^v Zᵀ), each branch present only
/// when its objective term is active. The sum always runs in view order.
pub fn update_a(d: &MultiViewDataset, s: &mut ModelState, h: &HyperParams) -> Result<()> {
    check_shapes(d, s)?;
    let zt = s.graph.transpose();
    let mut target = DMatrix::zeros(d.k(), s.anchors.ncols());
    for v in 0..d.n_views() {
        let xzt = d.view(v) * &zt;
        if h.mode.reconstruction_active() {
            target += s.projections[v].transpose() * &xzt;
        }
        if h.mode.latent_active() && h.lambda1 > 0.0 {
            target += (&s.transforms[v] * &xzt) * h.lambda1;
        }
    }
    s.anchors = orthogonal_procrustes(&target)?;
    Ok(())
}

/// Replaces every transform with the solution of its SPD system
/// (λ1 X^vX^vᵀ + λ3 diag(phi)) W^vᵀ = λ1 X^v (AZ)ᵀ, with phi the IRLS
/// weights of the pre-update transform (ones under `frobenius-w`). A no-op
/// when λ1 = λ3 = 0, where the system degenerates and any W is optimal.
pub fn update_w(d: &MultiViewDataset, s: &mut ModelState, h: &HyperParams) -> Result<()> {
    update_w_with(d, s, h, false)
}

pub fn update_w_with(
    d: &MultiViewDataset,
    s: &mut ModelState,
    h: &HyperParams,
    parallel: bool,
) -> Result<()> {
    check_shapes(d, s)?;
    if h.lambda1 == 0.0 && h.lambda3 == 0.0 {
        return Ok(());
    }
    let azt = (&s.anchors * &s.graph).transpose();
    let transforms = &s.transforms;
    s.transforms = map_views(parallel, d.n_views(), |v| {
        let x = d.view(v);
        let dv = x.nrows();
        let phi = match h.mode {
            AblationMode::FrobeniusPenalty => DVector::from_element(dv, 1.0),
            _ => l21_reweight(&transforms[v], REWEIGHT_EPS)?,
        };
        let mut gram = x * x.transpose();
        gram *= h.lambda1;
        for j in 0..dv {
            gram[(j, j)] += h.lambda3 * phi[j];
        }
        let rhs = (x * &azt) * h.lambda1;
        Ok(spd_solve(&gram, &rhs)?.transpose())
    })?;
    Ok(())
}

/// Replaces every graph column with the simplex projection of its scaled
/// gradient target. A no-op when the quadratic coefficient vanishes (every
/// simplex point is then optimal).
pub fn update_z(d: &MultiViewDataset, s: &mut ModelState, h: &HyperParams) -> Result<()> {
    update_z_with(d, s, h, false, false)
}

pub fn update_z_with(
    d: &MultiViewDataset,
    s: &mut ModelState,
    h: &HyperParams,
    paper_hessian: bool,
    parallel: bool,
) -> Result<()> {
    check_shapes(d, s)?;
    let rec = h.mode.reconstruction_active();
    let lat = h.mode.latent_active();
    let views = d.n_views() as f64;
    let mut denom = h.lambda2;
    if rec {
        denom += views;
    }
    if lat {
        denom += h.lambda1 * if paper_hessian { 1.0 } else { views };
    }
    if denom == 0.0 {
        return Ok(());
    }

    let m = s.anchors.ncols();
    let mut numer = DMatrix::zeros(m, d.n());
    for v in 0..d.n_views() {
        let x = d.view(v);
        if rec {
            let pa = &s.projections[v] * &s.anchors;
            numer += pa.transpose() * x;
        }
        if lat && h.lambda1 > 0.0 {
            let atw = s.anchors.transpose() * &s.transforms[v];
            numer += (atw * x) * h.lambda1;
        }
    }

    let inv = 1.0 / denom;
    project_columns(s.graph.as_mut_slice(), numer.as_slice(), m, inv, parallel);
    Ok(())
}

/// Projects each length-m column of the column-major buffer `z` onto the
/// simplex, targeting `g` scaled by `inv`. Column-chunked so parallel and
/// sequential execution run the identical per-column code.
fn project_columns(z: &mut [f64], g: &[f64], m: usize, inv: f64, parallel: bool) {
    const COLUMNS_PER_CHUNK: usize = 256;
    let chunk = m * COLUMNS_PER_CHUNK;
    let apply = |(zchunk, gchunk): (&mut [f64], &[f64])| {
        let mut y = vec![0.0; m];
        let mut order = Vec::with_capacity(m);
        for (zc, gc) in zchunk.chunks_mut(m).zip(gchunk.chunks(m)) {
            for i in 0..m {
                y[i] = gc[i] * inv;
            }
            project_simplex_into(&y, zc, &mut order);
        }
    };
    if parallel {
        z.par_chunks_mut(chunk).zip(g.par_chunks(chunk)).for_each(apply);
    } else {
        z.chunks_mut(chunk).zip(g.chunks(chunk)).for_each(apply);
    }
}

/// Deterministic feasible start: A = first m columns of I_k, Z uniform
/// 1/m, W^v = 0, P^v = top-k left singular vectors of X^v.
pub fn init_state(d: &MultiViewDataset, h: &HyperParams) -> Result<ModelState> {
    d.validate()?;
    h.validate()?;
    let k = d.k();
    let m = h.anchor_count(k)?;
    let mut projections = Vec::with_capacity(d.n_views());
    let mut transforms = Vec::with_capacity(d.n_views());
    for (v, x) in d.views().iter().enumerate() {
        let dv = x.nrows();
        if dv < k {
            return Err(Error::RankDeficientView { view: v, dim: dv, k });
        }
        let svd = svd_thin(x)?;
        projections.push(svd.u.columns(0, k).into_owned());
        transforms.push(DMatrix::zeros(k, dv));
    }
    Ok(ModelState {
        projections,
        transforms,
        anchors: DMatrix::identity(k, m),
        graph: DMatrix::from_element(m, d.n(), 1.0 / m as f64),
        iter: 0,
    })
}

/// Runs sweeps of the four block updates from `init_state` until the
/// relative objective change between consecutive sweeps drops below
/// `hyper.tol` or `hyper.max_iter` sweeps complete. Hitting the cap is not
/// an error. Ablation modes skip the updates of disabled blocks.
pub fn fit(d: &MultiViewDataset, cfg: &SolverConfig) -> Result<(ModelState, ConvergenceTrace)> {
    let h = &cfg.hyper;
    let mut s = init_state(d, h)?;
    let (mut prev, _) = objective(d, &s, h)?;
    let mut trace = ConvergenceTrace::default();
    for sweep in 1..=h.max_iter {
        let started = Instant::now();
        if h.mode.reconstruction_active() {
            update_p_with(d, &mut s, h, cfg.parallel_views)?;
        }
        update_a(d, &mut s, h)?;
        if h.mode.latent_active() {
            update_w_with(d, &mut s, h, cfg.parallel_views)?;
        }
        update_z_with(d, &mut s, h, cfg.paper_hessian, cfg.parallel_columns)?;
        s.iter = sweep;
        let (total, terms) = objective(d, &s, h)?;
        if cfg.record_trace {
            trace.records.push(TraceRecord {
                iter: sweep,
                total,
                reconstruction: terms[0],
                latent: terms[1],
                graph_penalty: terms[2],
                sparsity_penalty: terms[3],
                wall_ms: started.elapsed().as_secs_f64() * 1e3,
            });
        }
        let rel = (total - prev).abs() / prev.max(1e-12);
        prev = total;
        if rel < h.tol {
            break;
        }
    }
    Ok((s, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{domain, StreamRng};

    fn random_matrix(rng: &mut StreamRng, p: usize, q: usize) -> DMatrix<f64> {
        DMatrix::from_fn(p, q, |_, _| rng.normal())
    }

    fn random_orthonormal(rng: &mut StreamRng, p: usize, q: usize) -> DMatrix<f64> {
        random_matrix(rng, p, q).qr().q()
    }

    fn simplex_graph(rng: &mut StreamRng, m: usize, n: usize) -> DMatrix<f64> {
        let mut z = DMatrix::zeros(m, n);
        for j in 0..n {
            let raw: Vec<f64> = (0..m).map(|_| rng.uniform()).collect();
            let col = crate::numerics::project_simplex(&raw).unwrap();
            for i in 0..m {
                z[(i, j)] = col[i];
            }
        }
        z
    }

    /// Random dataset plus a feasible random state of matching shapes.
    fn random_instance(
        seed: u64,
        dims: &[usize],
        n: usize,
        k: usize,
    ) -> (MultiViewDataset, ModelState) {
        let mut rng = StreamRng::new(seed, domain::TEST, 17);
        let views: Vec<DMatrix<f64>> =
            dims.iter().map(|&dv| random_matrix(&mut rng, dv, n)).collect();
        let d = MultiViewDataset::new(views, None, k).unwrap();
        let s = ModelState {
            projections: dims.iter().map(|&dv| random_orthonormal(&mut rng, dv, k)).collect(),
            transforms: dims.iter().map(|&dv| random_matrix(&mut rng, k, dv) * 0.3).collect(),
            anchors: random_orthonormal(&mut rng, k, k),
            graph: simplex_graph(&mut rng, k, n),
            iter: 0,
        };
        (d, s)
    }

    fn naive_objective(d: &MultiViewDataset, s: &ModelState, h: &HyperParams) -> f64 {
        let k = s.anchors.nrows();
        let m = s.anchors.ncols();
        let n = d.n();
        let mut az = vec![vec![0.0; n]; k];
        for i in 0..k {
            for j in 0..n {
                for l in 0..m {
                    az[i][j] += s.anchors[(i, l)] * s.graph[(l, j)];
                }
            }
        }
        let mut total = 0.0;
        for v in 0..d.n_views() {
            let x = d.view(v);
            let dv = x.nrows();
            if h.mode.reconstruction_active() {
                for i in 0..dv {
                    for j in 0..n {
                        let mut recon = 0.0;
                        for t in 0..k {
                            recon += s.projections[v][(i, t)] * az[t][j];
                        }
                        let r = x[(i, j)] - recon;
                        total += r * r;
                    }
                }
            }
            if h.mode.latent_active() {
                for t in 0..k {
                    for j in 0..n {
                        let mut wx = 0.0;
                        for i in 0..dv {
                            wx += s.transforms[v][(t, i)] * x[(i, j)];
                        }
                        let r = wx - az[t][j];
                        total += h.lambda1 * r * r;
                    }
                }
                if h.mode == AblationMode::FrobeniusPenalty {
                    for t in 0..k {
                        for i in 0..dv {
                            total += h.lambda3 * s.transforms[v][(t, i)] * s.transforms[v][(t, i)];
                        }
                    }
                } else {
                    for i in 0..dv {
                        let mut sq = 0.0;
                        for t in 0..k {
                            sq += s.transforms[v][(t, i)] * s.transforms[v][(t, i)];
                        }
                        total += h.lambda3 * sq.sqrt();
                    }
                }
            }
        }
        for l in 0..m {
            for j in 0..n {
                total += h.lambda2 * s.graph[(l, j)] * s.graph[(l, j)];
            }
        }
        total
    }

    #[test]
    fn objective_zero_on_exact_unregularized_fit() {
        let (d0, s) = {
            let mut rng = StreamRng::new(21, domain::TEST, 18);
            let p = random_orthonormal(&mut rng, 6, 3);
            let a = DMatrix::identity(3, 3);
            let z = simplex_graph(&mut rng, 3, 10);
            let x = &p * &a * &z;
            let d = MultiViewDataset::new(vec![x], None, 3).unwrap();
            let s = ModelState {
                projections: vec![p],
                transforms: vec![DMatrix::zeros(3, 6)],
                anchors: a,
                graph: z,
                iter: 0,
            };
            (d, s)
        };
        let h = HyperParams { lambda1: 0.0, lambda2: 0.0, lambda3: 0.0, ..Default::default() };
        let (total, terms) = objective(&d0, &s, &h).unwrap();
        assert!(total <= 1e-12, "{total}");
        assert!(terms.iter().all(|&t| t <= 1e-12));
    }

    #[test]
    fn objective_hand_constructed_value() {
        let z = DMatrix::from_element(2, 2, 0.5);
        let x = z.clone();
        let d = MultiViewDataset::new(vec![x], None, 2).unwrap();
        let s = ModelState {
            projections: vec![DMatrix::identity(2, 2)],
            transforms: vec![DMatrix::zeros(2, 2)],
            anchors: DMatrix::identity(2, 2),
            graph: z,
            iter: 0,
        };
        let h = HyperParams {
            lambda1: 0.1,
            lambda2: 0.01,
            lambda3: 0.0,
            ..Default::default()
        };
        let (total, terms) = objective(&d, &s, &h).unwrap();
        assert!((total - 0.11).abs() < 1e-12, "{total}");
        assert!((terms[0] - 0.0).abs() < 1e-12);
        assert!((terms[1] - 0.1).abs() < 1e-12);
        assert!((terms[2] - 0.01).abs() < 1e-12);
    }

    #[test]
    fn objective_matches_naive_recomputation() {
        for (seed, mode) in [
            (31, AblationMode::Full),
            (32, AblationMode::ProjectionOnly),
            (33, AblationMode::TransformOnly),
            (34, AblationMode::FrobeniusPenalty),
        ] {
            let (d, s) = random_instance(seed, &[4, 7], 9, 3);
            let h = HyperParams {
                lambda1: 0.7,
                lambda2: 0.3,
                lambda3: 0.2,
                mode,
                ..Default::default()
            };
            let (total, terms) = objective(&d, &s, &h).unwrap();
            let naive = naive_objective(&d, &s, &h);
            assert!(
                (total - naive).abs() <= 1e-10 * (1.0 + naive.abs()),
                "{mode:?}: {total} vs {naive}"
            );
            let sum: f64 = terms.iter().sum();
            assert!((sum - total).abs() <= 1e-12 * (1.0 + total.abs()));
        }
    }

    #[test]
    fn objective_rejects_mismatched_state() {
        let (d, mut s) = random_instance(35, &[4], 8, 3);
        s.graph = DMatrix::zeros(3, 5);
        assert!(matches!(
            objective(&d, &s, &HyperParams::default()),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn update_p_recovers_planted_basis() {
        let mut rng = StreamRng::new(36, domain::TEST, 19);
        let p0 = random_orthonormal(&mut rng, 8, 3);
        let a = random_orthonormal(&mut rng, 3, 3);
        let z = simplex_graph(&mut rng, 3, 20);
        let x = &p0 * &a * &z;
        let d = MultiViewDataset::new(vec![x], None, 3).unwrap();
        let mut s = ModelState {
            projections: vec![random_orthonormal(&mut rng, 8, 3)],
            transforms: vec![DMatrix::zeros(3, 8)],
            anchors: a,
            graph: z,
            iter: 0,
        };
        update_p(&d, &mut s, &HyperParams::default()).unwrap();
        // AZ has full row rank (random simplex columns), so the Procrustes
        // maximizer of P₀(AZ)(AZ)ᵀ is exactly P₀.
        assert!((&s.projections[0] - &p0).amax() < 1e-8);
    }

    #[test]
    fn update_p_zero_view_is_deterministic() {
        let d = MultiViewDataset::new(vec![DMatrix::zeros(4, 6)], None, 2).unwrap();
        let h = HyperParams::default();
        let mut s1 = init_state(&d, &h).unwrap();
        let mut s2 = s1.clone();
        update_p(&d, &mut s1, &h).unwrap();
        update_p(&d, &mut s2, &h).unwrap();
        assert_eq!(s1.projections[0].as_slice(), s2.projections[0].as_slice());
        let gram = s1.projections[0].transpose() * &s1.projections[0];
        assert!((gram - DMatrix::identity(2, 2)).amax() < 1e-8);
    }

    #[test]
    fn update_p_beats_random_candidates() {
        let (d, mut s) = random_instance(37, &[6], 12, 3);
        let target = d.view(0) * (&s.anchors * &s.graph).transpose();
        update_p(&d, &mut s, &HyperParams::default()).unwrap();
        let ours = (s.projections[0].transpose() * &target).trace();
        let mut rng = StreamRng::new(38, domain::TEST, 20);
        for _ in 0..10_000 {
            let cand = random_orthonormal(&mut rng, 6, 3);
            let t = (cand.transpose() * &target).trace();
            assert!(ours >= t - 1e-9, "candidate trace {t} beats ours {ours}");
        }
    }

    #[test]
    fn update_a_exact_fit_returns_identity() {
        let mut rng = StreamRng::new(39, domain::TEST, 21);
        let p = random_orthonormal(&mut rng, 7, 3);
        let z = simplex_graph(&mut rng, 3, 15);
        let x = &p * DMatrix::identity(3, 3) * &z;
        let d = MultiViewDataset::new(vec![x], None, 3).unwrap();
        let mut s = ModelState {
            projections: vec![p],
            transforms: vec![DMatrix::zeros(3, 7)],
            anchors: random_orthonormal(&mut rng, 3, 3),
            graph: z,
            iter: 0,
        };
        let h = HyperParams { lambda1: 0.0, ..Default::default() };
        update_a(&d, &mut s, &h).unwrap();
        // Target PᵀXZᵀ = ZZᵀ is symmetric positive definite, whose
        // Procrustes maximizer is the identity.
        assert!((&s.anchors - DMatrix::identity(3, 3)).amax() < 1e-8);
    }

    #[test]
    fn update_a_diagonal_target_returns_identity() {
        // Graph rows orthonormal makes the target PᵀXZᵀ = D·ZZᵀ = D diagonal.
        let k = 3;
        let n = 6;
        let mut z = DMatrix::zeros(k, n);
        for i in 0..k {
            z[(i, i)] = 1.0;
        }
        let diag = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let p = DMatrix::identity(k, k);
        let x = &p * &diag * &z;
        let d = MultiViewDataset::new(vec![x], None, k).unwrap();
        let mut s = ModelState {
            projections: vec![p],
            transforms: vec![DMatrix::zeros(k, k)],
            anchors: DMatrix::identity(k, k),
            graph: z,
            iter: 0,
        };
        let h = HyperParams { lambda1: 0.0, ..Default::default() };
        update_a(&d, &mut s, &h).unwrap();
        assert!((&s.anchors - DMatrix::identity(k, k)).amax() < 1e-9);
    }

    #[test]
    fn update_a_beats_random_candidates() {
        let (d, mut s) = random_instance(40, &[5, 6], 11, 3);
        let h = HyperParams { lambda1: 0.6, ..Default::default() };
        let zt = s.graph.transpose();
        let mut target = DMatrix::zeros(3, 3);
        for v in 0..2 {
            let xzt = d.view(v) * &zt;
            target += s.projections[v].transpose() * &xzt;
            target += (&s.transforms[v] * &xzt) * h.lambda1;
        }
        update_a(&d, &mut s, &h).unwrap();
        let ours = (s.anchors.transpose() * &target).trace();
        let mut rng = StreamRng::new(41, domain::TEST, 22);
        for _ in 0..10_000 {
            let cand = random_orthonormal(&mut rng, 3, 3);
            let t = (cand.transpose() * &target).trace();
            assert!(ours >= t - 1e-9);
        }
    }

    #[test]
    fn update_w_without_sparsity_is_least_squares() {
        let (d, mut s) = random_instance(42, &[5], 14, 3);
        let h = HyperParams { lambda1: 0.8, lambda3: 0.0, ..Default::default() };
        let x = d.view(0).clone();
        let az = &s.anchors * &s.graph;
        update_w(&d, &mut s, &h).unwrap();
        // Normal equations via an independent LU route.
        let gram = &x * x.transpose();
        let rhs = &x * az.transpose();
        let wt = gram.lu().solve(&rhs).unwrap();
        assert!((&s.transforms[0] - wt.transpose()).amax() < 1e-8);
    }

    #[test]
    fn update_w_zero_target_gives_zero() {
        let (d, mut s) = random_instance(43, &[5], 9, 3);
        s.graph = DMatrix::zeros(3, 9);
        s.transforms[0] = random_matrix(&mut StreamRng::new(44, domain::TEST, 23), 3, 5);
        let h = HyperParams { lambda1: 1.0, lambda3: 0.5, ..Default::default() };
        update_w(&d, &mut s, &h).unwrap();
        assert!(s.transforms[0].amax() < 1e-10);
    }

    #[test]
    fn update_w_skips_when_unconstrained() {
        let (d, mut s) = random_instance(45, &[5], 9, 3);
        let before = s.transforms[0].clone();
        let h = HyperParams { lambda1: 0.0, lambda3: 0.0, ..Default::default() };
        update_w(&d, &mut s, &h).unwrap();
        assert_eq!(s.transforms[0].as_slice(), before.as_slice());
    }

    #[test]
    fn update_w_stationary_under_finite_differences() {
        let (d, mut s) = random_instance(46, &[4], 12, 3);
        let h = HyperParams { lambda1: 1.0, lambda3: 0.5, ..Default::default() };
        let phi = l21_reweight(&s.transforms[0], REWEIGHT_EPS).unwrap();
        let x = d.view(0).clone();
        let az = &s.anchors * &s.graph;
        update_w(&d, &mut s, &h).unwrap();
        let w = &s.transforms[0];
        let surrogate = |w: &DMatrix<f64>| -> f64 {
            let mut val = h.lambda1 * (w * &x - &az).norm_squared();
            for (j, c) in w.column_iter().enumerate() {
                val += h.lambda3 * phi[j] * c.norm_squared();
            }
            val
        };
        let hstep = 1e-2;
        let mut max_grad = 0.0f64;
        for t in 0..w.nrows() {
            for i in 0..w.ncols() {
                let mut plus = w.clone();
                plus[(t, i)] += hstep;
                let mut minus = w.clone();
                minus[(t, i)] -= hstep;
                let g = (surrogate(&plus) - surrogate(&minus)) / (2.0 * hstep);
                max_grad = max_grad.max(g.abs());
            }
        }
        assert!(max_grad <= 1e-7, "finite-difference gradient {max_grad}");
    }

    #[test]
    fn update_z_reduces_to_back_projection() {
        let (d, mut s) = random_instance(47, &[6], 10, 3);
        let h = HyperParams { lambda1: 0.0, lambda2: 0.0, ..Default::default() };
        let pa = &s.projections[0] * &s.anchors;
        let x = d.view(0).clone();
        update_z(&d, &mut s, &h).unwrap();
        for j in 0..10 {
            let target: Vec<f64> = (pa.transpose() * x.column(j)).iter().copied().collect();
            let want = crate::numerics::project_simplex(&target).unwrap();
            for i in 0..3 {
                assert!((s.graph[(i, j)] - want[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn update_z_zero_data_gives_uniform_columns() {
        let d = MultiViewDataset::new(vec![DMatrix::zeros(4, 6)], None, 3).unwrap();
        let h = HyperParams::default();
        let mut s = init_state(&d, &h).unwrap();
        s.graph = DMatrix::from_fn(3, 6, |i, j| if i == j % 3 { 1.0 } else { 0.0 });
        update_z(&d, &mut s, &h).unwrap();
        for j in 0..6 {
            for i in 0..3 {
                assert!((s.graph[(i, j)] - 1.0 / 3.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn update_z_degenerate_coefficient_keeps_graph() {
        let (d, mut s) = random_instance(48, &[5], 9, 3);
        let before = s.graph.clone();
        let h = HyperParams {
            lambda1: 0.0,
            lambda2: 0.0,
            mode: AblationMode::TransformOnly,
            ..Default::default()
        };
        update_z(&d, &mut s, &h).unwrap();
        assert_eq!(s.graph.as_slice(), before.as_slice());
    }

    #[test]
    fn update_z_matches_generic_qp_oracle() {
        let (d, mut s) = random_instance(49, &[5, 7], 12, 4);
        let h = HyperParams { lambda1: 0.6, lambda2: 0.25, ..Default::default() };
        let proj_anchor: Vec<DMatrix<f64>> =
            (0..2).map(|v| &s.projections[v] * &s.anchors).collect();
        let anchor_t_w: Vec<DMatrix<f64>> =
            (0..2).map(|v| s.anchors.transpose() * &s.transforms[v]).collect();
        let anchors = s.anchors.clone();
        update_z(&d, &mut s, &h).unwrap();
        let m = 4;
        for j in 0..12 {
            // Quadratic of the column subproblem built without the
            // orthonormality simplification: H = 2(Σ (PA)ᵀ(PA) + λ1 V AᵀA + λ2 I).
            let mut hmat = vec![vec![0.0; m]; m];
            let mut g = vec![0.0; m];
            for v in 0..2 {
                let papa = proj_anchor[v].transpose() * &proj_anchor[v];
                let ata = anchors.transpose() * &anchors;
                for r in 0..m {
                    for c in 0..m {
                        hmat[r][c] += 2.0 * (papa[(r, c)] + h.lambda1 * ata[(r, c)]);
                    }
                }
                let xj = d.view(v).column(j);
                let lin_rec = proj_anchor[v].transpose() * xj;
                let lin_lat = &anchor_t_w[v] * xj;
                for r in 0..m {
                    g[r] -= 2.0 * (lin_rec[r] + h.lambda1 * lin_lat[r]);
                }
            }
            for r in 0..m {
                hmat[r][r] += 2.0 * h.lambda2;
            }
            let want = dscmc_oracles::simplex_qp_pg(&hmat, &g, 400);
            for i in 0..m {
                assert!(
                    (s.graph[(i, j)] - want[i]).abs() < 1e-8,
                    "column {j}: {:?} vs {want:?}",
                    s.graph.column(j).as_slice()
                );
            }
        }
    }

    #[test]
    fn init_state_satisfies_invariants_and_is_deterministic() {
        let (d, _) = random_instance(50, &[6, 4], 15, 3);
        let h = HyperParams::default();
        let s1 = init_state(&d, &h).unwrap();
        s1.check_invariants().unwrap();
        let s2 = init_state(&d, &h).unwrap();
        for v in 0..2 {
            assert_eq!(s1.projections[v].as_slice(), s2.projections[v].as_slice());
        }
        assert_eq!(s1.anchors.as_slice(), s2.anchors.as_slice());
        assert_eq!(s1.graph.as_slice(), s2.graph.as_slice());
        assert_eq!(s1.graph[(0, 0)], 1.0 / 3.0);
    }

    #[test]
    fn init_state_rejects_narrow_view() {
        let (d, _) = random_instance(51, &[6, 2], 15, 3);
        let err = init_state(&d, &HyperParams::default()).unwrap_err();
        match err {
            Error::RankDeficientView { view, dim, k } => {
                assert_eq!((view, dim, k), (1, 2, 3));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn fit_single_sweep_has_trace_length_one() {
        let (d, _) = random_instance(52, &[5, 4], 12, 3);
        let cfg = SolverConfig::new(HyperParams { max_iter: 1, ..Default::default() });
        let (s, trace) = fit(&d, &cfg).unwrap();
        assert_eq!(trace.records.len(), 1);
        assert_eq!(s.iter, 1);
    }

    #[test]
    fn fit_exact_instance_reaches_zero_objective() {
        let mut rng = StreamRng::new(53, domain::TEST, 24);
        let k = 3;
        let n = 18;
        let p = random_orthonormal(&mut rng, 7, k);
        let mut z = DMatrix::zeros(k, n);
        for j in 0..n {
            z[(j % k, j)] = 1.0;
        }
        let x = &p * &z;
        let d = MultiViewDataset::new(vec![x], None, k).unwrap();
        let h = HyperParams {
            lambda1: 0.0,
            lambda2: 0.0,
            lambda3: 0.0,
            tol: 0.0,
            ..Default::default()
        };
        let cfg = SolverConfig::new(h.clone());
        let (s, trace) = fit(&d, &cfg).unwrap();
        let last = trace.records.last().unwrap();
        assert!(last.total <= 1e-10, "final objective {}", last.total);
        trace.check_invariants().unwrap();
        s.check_invariants().unwrap();
    }

    #[test]
    fn fit_is_bitwise_identical_across_parallel_flags() {
        let (d, _) = random_instance(54, &[6, 5, 4], 20, 3);
        let h = HyperParams {
            lambda1: 0.5,
            lambda2: 0.2,
            lambda3: 0.1,
            max_iter: 5,
            tol: 0.0,
            ..Default::default()
        };
        let mut serial_cfg = SolverConfig::new(h.clone());
        serial_cfg.parallel_views = false;
        serial_cfg.parallel_columns = false;
        let parallel_cfg = SolverConfig::new(h);
        let (s1, t1) = fit(&d, &serial_cfg).unwrap();
        let (s2, t2) = fit(&d, &parallel_cfg).unwrap();
        for v in 0..3 {
            assert_eq!(s1.projections[v].as_slice(), s2.projections[v].as_slice());
            assert_eq!(s1.transforms[v].as_slice(), s2.transforms[v].as_slice());
        }
        assert_eq!(s1.anchors.as_slice(), s2.anchors.as_slice());
        assert_eq!(s1.graph.as_slice(), s2.graph.as_slice());
        for (a, b) in t1.records.iter().zip(&t2.records) {
            assert_eq!(a.total.to_bits(), b.total.to_bits());
        }
    }
}
