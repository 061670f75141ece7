//! Seeded synthetic datasets at desk scale: Gaussian blob views sharing one
//! labeling, and exact-fit planted factorizations. All draws go through
//! dedicated stream-split RNGs (one stream per view and purpose), so any
//! language binding that reproduces the generator reproduces the data
//! bit for bit.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{ModelState, MultiViewDataset};
use crate::rng::{domain, StreamRng};

/// Shape and geometry of a blob dataset: `separation` is the minimum
/// pairwise distance between cluster means in units of `sigma`.
#[derive(Clone, Debug)]
pub struct BlobSpec {
    pub n: usize,
    pub k: usize,
    pub dims: Vec<usize>,
    pub separation: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl BlobSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 || self.n < self.k {
            return Err(Error::InvalidConfig(format!(
                "blob spec needs n >= k >= 2, got n = {}, k = {}",
                self.n, self.k
            )));
        }
        if self.dims.is_empty() {
            return Err(Error::InvalidConfig("blob spec needs at least one view".into()));
        }
        for (v, &dv) in self.dims.iter().enumerate() {
            if dv < self.k {
                return Err(Error::RankDeficientView { view: v, dim: dv, k: self.k });
            }
        }
        if !self.separation.is_finite() || self.separation < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "separation must be finite and >= 0, got {}",
                self.separation
            )));
        }
        if !self.sigma.is_finite() || self.sigma <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "sigma must be finite and > 0, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// Draws k cluster means in `dim` dimensions with pairwise distance at
/// least `min_dist`: rejection sampling from a centered box, and when 1000
/// draws in a row fail, the box doubles so termination is guaranteed.
fn sample_means(rng: &mut StreamRng, k: usize, dim: usize, min_dist: f64) -> Vec<Vec<f64>> {
    let mut half_width = (min_dist * k as f64).max(1.0);
    loop {
        'tries: for _ in 0..1000 {
            let means: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..dim).map(|_| (rng.uniform() * 2.0 - 1.0) * half_width).collect())
                .collect();
            for a in 0..k {
                for b in a + 1..k {
                    let dist2: f64 = (0..dim)
                        .map(|t| (means[a][t] - means[b][t]).powi(2))
                        .sum();
                    if dist2 < min_dist * min_dist {
                        continue 'tries;
                    }
                }
            }
            return means;
        }
        half_width *= 2.0;
    }
}

/// Gaussian blobs: one shared balanced labeling (class sizes within one
/// sample of each other), per-view means at pairwise distance
/// >= separation·sigma, samples at mean + sigma·standard normal.
pub fn make_blobs(spec: &BlobSpec) -> Result<MultiViewDataset> {
    spec.validate()?;
    let mut labels: Vec<usize> = (0..spec.n).map(|i| i % spec.k).collect();
    StreamRng::new(spec.seed, domain::BLOB_LABELS, 0).shuffle(&mut labels);
    let views: Vec<DMatrix<f64>> = spec
        .dims
        .iter()
        .enumerate()
        .map(|(v, &dv)| {
            let mut mean_rng = StreamRng::new(spec.seed, domain::BLOB_MEANS, v as u64);
            let means =
                sample_means(&mut mean_rng, spec.k, dv, spec.separation * spec.sigma);
            let mut noise = StreamRng::new(spec.seed, domain::BLOB_NOISE, v as u64);
            let mut x = DMatrix::zeros(dv, spec.n);
            for j in 0..spec.n {
                let mean = &means[labels[j]];
                for i in 0..dv {
                    x[(i, j)] = mean[i] + spec.sigma * noise.normal();
                }
            }
            x
        })
        .collect();
    MultiViewDataset::new(views, Some(labels), spec.k)
}

/// Exact-fit instance: orthonormal per-view bases (QR of seeded Gaussians,
/// column signs fixed by their largest entry), identity anchors, one-hot
/// graph columns over a contiguous balanced labeling, and views assembled
/// as basis · graph. The returned state reproduces the data exactly, so
/// the unregularized objective is zero.
pub fn make_planted(
    n: usize,
    k: usize,
    dims: &[usize],
    seed: u64,
) -> Result<(MultiViewDataset, ModelState)> {
    if k < 2 || n < k {
        return Err(Error::InvalidConfig(format!(
            "planted instance needs n >= k >= 2, got n = {n}, k = {k}"
        )));
    }
    if dims.is_empty() {
        return Err(Error::InvalidConfig("planted instance needs at least one view".into()));
    }
    for (v, &dv) in dims.iter().enumerate() {
        if dv < k {
            return Err(Error::RankDeficientView { view: v, dim: dv, k });
        }
    }
    let labels: Vec<usize> = (0..n).map(|j| j * k / n).collect();
    let mut graph = DMatrix::zeros(k, n);
    for (j, &l) in labels.iter().enumerate() {
        graph[(l, j)] = 1.0;
    }
    let mut views = Vec::with_capacity(dims.len());
    let mut projections = Vec::with_capacity(dims.len());
    let mut transforms = Vec::with_capacity(dims.len());
    for (v, &dv) in dims.iter().enumerate() {
        let mut rng = StreamRng::new(seed, domain::PLANTED_BASIS, v as u64);
        let gaussian = DMatrix::from_fn(dv, k, |_, _| rng.normal());
        let mut basis = gaussian.qr().q();
        for c in 0..k {
            let mut arg = 0;
            for r in 1..dv {
                if basis[(r, c)].abs() > basis[(arg, c)].abs() {
                    arg = r;
                }
            }
            if basis[(arg, c)] < 0.0 {
                for r in 0..dv {
                    basis[(r, c)] = -basis[(r, c)];
                }
            }
        }
        views.push(&basis * &graph);
        projections.push(basis);
        transforms.push(DMatrix::zeros(k, dv));
    }
    let dataset = MultiViewDataset::new(views, Some(labels), k)?;
    let state = ModelState {
        projections,
        transforms,
        anchors: DMatrix::identity(k, k),
        graph,
        iter: 0,
    };
    Ok((dataset, state))
}
