//! Turns the learned anchor graph into cluster labels: samples are embedded
//! through the graph's top right singular vectors, then partitioned by
//! restarted k-means. Restarts draw from independent seeded streams and the
//! winner is the minimal-inertia restart, ties to the lowest restart index,
//! so the result is deterministic no matter how restarts are scheduled.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{ensure_finite, svd_thin};
use crate::rng::{domain, StreamRng};

const MAX_LLOYD_ITERS: usize = 300;

/// Best clustering found across restarts. Row c of `centers` is the center
/// of cluster c in the embedding space.
#[derive(Clone, Debug)]
pub struct KMeansModel {
    pub labels: Vec<usize>,
    pub centers: DMatrix<f64>,
    pub inertia: f64,
    pub n_iter: usize,
}

impl KMeansModel {
    /// Inertia must restate the labeled distances and labels must index
    /// into `centers`.
    pub fn check_invariants(&self, points: &DMatrix<f64>) -> Result<()> {
        let k = self.centers.nrows();
        if self.labels.len() != points.nrows() {
            return Err(Error::LengthMismatch {
                left: self.labels.len(),
                right: points.nrows(),
            });
        }
        let mut total = 0.0;
        for (i, &l) in self.labels.iter().enumerate() {
            if l >= k {
                return Err(Error::InvariantViolation(format!(
                    "label {l} out of range for {k} centers"
                )));
            }
            total += squared_distance(points, i, &self.centers, l);
        }
        if (total - self.inertia).abs() > 1e-9 * (1.0 + self.inertia) {
            return Err(Error::InvariantViolation(format!(
                "inertia {} does not match recomputed {total}",
                self.inertia
            )));
        }
        Ok(())
    }
}

/// Embeds the n graph columns as rows of an n × k matrix built from the
/// top-k right singular vectors of the graph.
pub fn spectral_embed(z: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    let m = z.nrows();
    if k == 0 || k > m {
        return Err(Error::InvalidConfig(format!(
            "embedding dimension k = {k} must lie in 1..={m} (the graph's anchor count)"
        )));
    }
    let svd = svd_thin(z)?;
    Ok(svd.vt.rows(0, k).transpose().into_owned())
}

fn squared_distance(points: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>, c: usize) -> f64 {
    let mut acc = 0.0;
    for t in 0..points.ncols() {
        let d = points[(i, t)] - centers[(c, t)];
        acc += d * d;
    }
    acc
}

/// k-means++ seeding: first center uniform, later centers sampled with
/// probability proportional to squared distance from the chosen set. When
/// every remaining point duplicates a center the draw falls back to a
/// uniform index, which keeps degenerate inputs (fewer than k distinct
/// rows) running rather than failing.
fn seed_centers(points: &DMatrix<f64>, k: usize, rng: &mut StreamRng) -> DMatrix<f64> {
    let n = points.nrows();
    let mut centers = DMatrix::zeros(k, points.ncols());
    centers.row_mut(0).copy_from(&points.row(rng.index(n)));
    let mut d2: Vec<f64> = (0..n).map(|i| squared_distance(points, i, &centers, 0)).collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let chosen = if total > 0.0 {
            let target = rng.uniform() * total;
            let mut cum = 0.0;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                cum += w;
                if cum > target {
                    pick = i;
                    break;
                }
            }
            if d2[pick] == 0.0 {
                // Rounding in the cumulative walk can land on a zero-mass
                // point; take the last positive-mass index instead.
                pick = (0..n).rev().find(|&i| d2[i] > 0.0).unwrap_or(pick);
            }
            pick
        } else {
            rng.index(n)
        };
        centers.row_mut(c).copy_from(&points.row(chosen));
        for i in 0..n {
            d2[i] = d2[i].min(squared_distance(points, i, &centers, c));
        }
    }
    centers
}

/// Nearest-center assignment, ties to the lowest center index. Returns the
/// labels and their inertia against `centers`.
fn assign(points: &DMatrix<f64>, centers: &DMatrix<f64>) -> (Vec<usize>, f64) {
    let n = points.nrows();
    let k = centers.nrows();
    let mut labels = vec![0usize; n];
    let mut inertia = 0.0;
    for i in 0..n {
        let mut best = squared_distance(points, i, centers, 0);
        let mut arg = 0;
        for c in 1..k {
            let d = squared_distance(points, i, centers, c);
            if d < best {
                best = d;
                arg = c;
            }
        }
        labels[i] = arg;
        inertia += best;
    }
    (labels, inertia)
}

/// Means update. A cluster left empty keeps losing its points, so its
/// center is reset to the point farthest from its assigned center (ties to
/// the lowest point index); each repaired point is consumed so two empty
/// clusters never land on the same spot.
fn update_centers(points: &DMatrix<f64>, labels: &[usize], centers: &mut DMatrix<f64>) {
    let n = points.nrows();
    let k = centers.nrows();
    let dim = points.ncols();
    let mut counts = vec![0usize; k];
    let mut sums: DMatrix<f64> = DMatrix::zeros(k, dim);
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for t in 0..dim {
            sums[(l, t)] += points[(i, t)];
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            for t in 0..dim {
                centers[(c, t)] = sums[(c, t)] / counts[c] as f64;
            }
        }
    }
    if counts.iter().any(|&c| c == 0) {
        let mut d2: Vec<f64> =
            (0..n).map(|i| squared_distance(points, i, centers, labels[i])).collect();
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let mut far = 0;
            for i in 1..n {
                if d2[i] > d2[far] {
                    far = i;
                }
            }
            centers.row_mut(c).copy_from(&points.row(far));
            d2[far] = -1.0;
        }
    }
}

/// One seeded restart: k-means++ then Lloyd iterations to an assignment
/// fixpoint or the iteration cap. `history` (when given) records inertia
/// after every assignment pass.
fn lloyd(
    points: &DMatrix<f64>,
    k: usize,
    rng: &mut StreamRng,
    mut history: Option<&mut Vec<f64>>,
) -> KMeansModel {
    let mut centers = seed_centers(points, k, rng);
    let (mut labels, mut inertia) = assign(points, &centers);
    let mut n_iter = 1;
    if let Some(h) = history.as_deref_mut() {
        h.push(inertia);
    }
    while n_iter < MAX_LLOYD_ITERS {
        update_centers(points, &labels, &mut centers);
        let (new_labels, new_inertia) = assign(points, &centers);
        n_iter += 1;
        if let Some(h) = history.as_deref_mut() {
            h.push(new_inertia);
        }
        let stable = new_labels == labels;
        labels = new_labels;
        inertia = new_inertia;
        if stable {
            break;
        }
    }
    KMeansModel { labels, centers, inertia, n_iter }
}

/// Clusters the embedding rows into k groups, returning the best of
/// `restarts` independently seeded runs. Restart r draws from its own
/// stream of `seed`, so adding restarts never changes the earlier runs and
/// the best inertia is non-increasing in the restart count.
pub fn kmeans(points: &DMatrix<f64>, k: usize, restarts: usize, seed: u64) -> Result<KMeansModel> {
    let n = points.nrows();
    if k == 0 || n < k {
        return Err(Error::InvalidConfig(format!(
            "k-means needs 1 <= k <= n, got k = {k} with n = {n}"
        )));
    }
    if restarts == 0 {
        return Err(Error::InvalidConfig("k-means needs at least one restart".into()));
    }
    ensure_finite(points, "k-means input")?;
    let runs: Vec<KMeansModel> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = StreamRng::new(seed, domain::KMEANS_RESTART, r as u64);
            lloyd(points, k, &mut rng, None)
        })
        .collect();
    let best = runs
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.inertia.total_cmp(&b.inertia).then(i.cmp(j)))
        .map(|(_, m)| m)
        .expect("at least one restart");
    Ok(best)
}
