//! Dense kernels the block solvers reduce to: thin SVD, orthogonal
//! Procrustes, simplex projection, ℓ2,1 machinery, and an SPD solve.
//!
//! All outputs are deterministic. The SVD applies a fixed sign convention
//! (largest-magnitude entry of each left singular vector made positive, ties
//! to the lowest row index) so that downstream consumers never see the
//! backend's arbitrary sign choices, and sorts singular values descending.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Thin SVD of a p × q matrix: U (p × r), singular values (descending, ≥ 0),
/// Vt (r × q), with r = min(p, q).
pub struct ThinSvd {
    pub u: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    pub vt: DMatrix<f64>,
}

impl ThinSvd {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.u * DMatrix::from_diagonal(&self.singular_values) * &self.vt
    }
}

pub(crate) fn ensure_finite(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// True when u·diag(s)·vt reproduces b and both factors are orthonormal to
/// a tolerance far looser than any healthy factorization and far tighter
/// than a broken one.
fn factorization_ok(b: &DMatrix<f64>, u: &DMatrix<f64>, s: &DVector<f64>, vt: &DMatrix<f64>) -> bool {
    if s.iter().any(|x| !x.is_finite()) {
        return false;
    }
    let dim = b.nrows().max(b.ncols()).max(1) as f64;
    let tol = 1e-11 * dim;
    let r = s.len();
    let eye = DMatrix::<f64>::identity(r, r);
    if (u.transpose() * u - &eye).amax() > tol || (vt * vt.transpose() - &eye).amax() > tol {
        return false;
    }
    let recon = u * DMatrix::from_diagonal(s) * vt;
    (recon - b).amax() <= tol * b.amax().max(1.0)
}

/// One-sided Jacobi SVD of a p × q matrix, p ≥ 0, returning (u, s, vt) in
/// backend layout (unsorted, unsigned). Rotates column pairs until all are
/// mutually orthogonal; column norms are the singular values. Slower than
/// the bidiagonalization backend but immune to its clustered-singular-value
/// failure mode, and fully deterministic.
pub(crate) fn jacobi_svd(b: &DMatrix<f64>) -> Result<(DMatrix<f64>, DVector<f64>, DMatrix<f64>)> {
    let (p, q) = b.shape();
    if p < q {
        // Factor the transpose, then swap the factor roles back.
        let (u, s, vt) = jacobi_svd(&b.transpose())?;
        return Ok((vt.transpose(), s, u.transpose()));
    }
    let mut w = b.clone();
    let mut v = DMatrix::<f64>::identity(q, q);
    let mut converged = false;
    for _ in 0..100 {
        // Deflate columns that have shrunk to rounding noise relative to
        // the largest: they carry no resolvable singular value, and left
        // alone they keep absorbing rotation debris and never quiesce.
        // Zeroing them perturbs the factorization by at most the cutoff.
        let mut nmax = 0.0f64;
        for j in 0..q {
            nmax = nmax.max(w.column(j).norm());
        }
        let cutoff = p.max(q) as f64 * f64::EPSILON * nmax;
        for j in 0..q {
            if w.column(j).norm() <= cutoff {
                for i in 0..p {
                    w[(i, j)] = 0.0;
                }
            }
        }
        let mut rotated = false;
        for j in 0..q.saturating_sub(1) {
            for l in (j + 1)..q {
                let alpha = w.column(j).norm_squared();
                let beta = w.column(l).norm_squared();
                let gamma = w.column(j).dot(&w.column(l));
                // Norms multiplied via their square roots so the threshold
                // survives underflow; columns whose squared norm itself
                // underflows are numerically zero and left alone.
                if alpha == 0.0 || beta == 0.0 || gamma.abs() <= 1e-14 * alpha.sqrt() * beta.sqrt()
                {
                    continue;
                }
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..p {
                    let a = w[(i, j)];
                    let d = w[(i, l)];
                    w[(i, j)] = c * a - s * d;
                    w[(i, l)] = s * a + c * d;
                }
                for i in 0..q {
                    let a = v[(i, j)];
                    let d = v[(i, l)];
                    v[(i, j)] = c * a - s * d;
                    v[(i, l)] = s * a + c * d;
                }
                rotated = true;
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical("jacobi svd did not converge".into()));
    }

    let mut s = DVector::zeros(q);
    for j in 0..q {
        s[j] = w.column(j).norm();
    }
    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&a, &b2| s[b2].total_cmp(&s[a]));
    let w = w.select_columns(&order);
    let v = v.select_columns(&order);
    let s = DVector::from_iterator(q, order.iter().map(|&i| s[i]));

    let mut u = DMatrix::zeros(p, q);
    for j in 0..q {
        if s[j] > 0.0 {
            for i in 0..p {
                u[(i, j)] = w[(i, j)] / s[j];
            }
        } else {
            // Exactly-zero singular value: complete the basis with the
            // coordinate direction least represented by the earlier columns
            // (ties to the lowest index), re-orthogonalized once more for
            // good measure. Zeros sort last, so columns 0..j are final.
            let mut best = DVector::zeros(p);
            let mut best_norm = -1.0;
            for cand in 0..p {
                let mut dir = DVector::zeros(p);
                dir[cand] = 1.0;
                for jj in 0..j {
                    let proj = u.column(jj).dot(&dir);
                    for i in 0..p {
                        dir[i] -= proj * u[(i, jj)];
                    }
                }
                let nrm = dir.norm();
                if nrm > best_norm {
                    best_norm = nrm;
                    best = dir;
                }
                if best_norm >= 0.9 {
                    break;
                }
            }
            for jj in 0..j {
                let proj = u.column(jj).dot(&best);
                for i in 0..p {
                    best[i] -= proj * u[(i, jj)];
                }
            }
            let nrm = best.norm();
            if nrm == 0.0 {
                return Err(Error::Numerical("jacobi svd basis completion failed".into()));
            }
            for i in 0..p {
                u[(i, j)] = best[i] / nrm;
            }
        }
    }
    Ok((u, s, v.transpose()))
}

/// Thin SVD with descending singular values and the crate-wide sign
/// convention.
///
/// The backend factorization is verified by reconstruction and factor
/// orthogonality before use: matrices with tightly clustered singular
/// values (a near-constant matrix is enough) can make the backend's
/// implicit-QR iteration mis-converge. Any rejected or failed backend run
/// falls back to the Jacobi path, so both routes stay deterministic.
pub fn svd_thin(b: &DMatrix<f64>) -> Result<ThinSvd> {
    ensure_finite(b, "svd input")?;
    let backend = b.clone().try_svd(true, true, f64::EPSILON, 0).and_then(|svd| {
        let u = svd.u.expect("u requested");
        let s = svd.singular_values;
        let vt = svd.v_t.expect("v_t requested");
        factorization_ok(b, &u, &s, &vt).then_some((u, s, vt))
    });
    let (mut u, mut s, mut vt) = match backend {
        Some(parts) => parts,
        None => jacobi_svd(b)?,
    };

    let r = s.len();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    if order.iter().enumerate().any(|(i, &o)| i != o) {
        u = u.select_columns(&order);
        vt = vt.select_rows(&order);
        s = DVector::from_iterator(r, order.iter().map(|&i| s[i]));
    }

    for i in 0..r {
        let mut arg = 0;
        let mut best = -1.0;
        for j in 0..u.nrows() {
            let a = u[(j, i)].abs();
            if a > best {
                best = a;
                arg = j;
            }
        }
        if u[(arg, i)] < 0.0 {
            for j in 0..u.nrows() {
                u[(j, i)] = -u[(j, i)];
            }
            for j in 0..vt.ncols() {
                vt[(i, j)] = -vt[(i, j)];
            }
        }
    }
    Ok(ThinSvd { u, singular_values: s, vt })
}

/// The column-orthonormal p × q matrix Q maximizing Tr(QᵀB), i.e. Q = U·Vt
/// from the thin SVD of B. Requires p ≥ q. Rank-deficient B still yields a
/// valid (and, by the SVD sign convention, deterministic) maximizer.
pub fn orthogonal_procrustes(b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (p, q) = b.shape();
    if p < q {
        return Err(Error::DimensionMismatch(format!(
            "procrustes input must be square or tall, got {p}x{q}"
        )));
    }
    let svd = svd_thin(b)?;
    Ok(&svd.u * &svd.vt)
}

/// Euclidean projection onto the probability simplex {z ≥ 0, Σz = 1} by the
/// sort-and-threshold method, O(m log m).
pub fn project_simplex(y: &[f64]) -> Result<Vec<f64>> {
    if y.is_empty() {
        return Err(Error::DimensionMismatch("cannot project an empty vector".into()));
    }
    if !y.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("simplex projection input".into()));
    }
    let mut out = vec![0.0; y.len()];
    let mut order = Vec::new();
    project_simplex_into(y, &mut out, &mut order);
    Ok(out)
}

/// Allocation-free core of `project_simplex`; `order` is reusable scratch.
///
/// The thresholded output sums to one only within a few ulps, so a final
/// correction pins the naive left-to-right sum to exactly 1.0. That
/// exactness is what makes the projection idempotent bit for bit: a
/// feasible input takes the fast path and comes back unchanged.
pub(crate) fn project_simplex_into(y: &[f64], out: &mut [f64], order: &mut Vec<usize>) {
    let m = y.len();
    debug_assert!(m > 0 && out.len() == m);
    if y.iter().all(|&v| v >= 0.0) && y.iter().sum::<f64>() == 1.0 {
        out.copy_from_slice(y);
        return;
    }

    order.clear();
    order.extend(0..m);
    order.sort_by(|&a, &b| y[b].total_cmp(&y[a]));

    let mut cum = 0.0;
    let mut tau = 0.0;
    for (rank, &i) in order.iter().enumerate() {
        cum += y[i];
        let cand = (cum - 1.0) / (rank + 1) as f64;
        if y[i] > cand {
            tau = cand;
        }
    }

    for i in 0..m {
        out[i] = (y[i] - tau).max(0.0);
    }

    // The residual goes to the last positive coordinate: with only zeros
    // after it, the full index-order sum incurs exactly one more rounding
    // there, so setting it to 1 - prefix is exact whenever prefix >= 0.5
    // (Sterbenz) and otherwise lands within one ulp, which the second
    // assignment closes (the coordinate then exceeds 0.5, where a one-ulp
    // step is representable). A coordinate that would need to go negative
    // is zeroed and the residual moves left.
    loop {
        if out.iter().sum::<f64>() == 1.0 {
            return;
        }
        let Some(j) = (0..m).rev().find(|&i| out[i] > 0.0) else {
            // Degenerate thresholding (enormous inputs can cancel to all
            // zeros): all mass goes to the largest input coordinate.
            let mut arg = 0;
            for i in 1..m {
                if y[i] > y[arg] {
                    arg = i;
                }
            }
            out.fill(0.0);
            out[arg] = 1.0;
            return;
        };
        let prefix: f64 = out[..j].iter().sum();
        let first = 1.0 - prefix;
        if first < 0.0 {
            out[j] = 0.0;
            continue;
        }
        out[j] = first;
        let total = prefix + first;
        if total != 1.0 {
            out[j] = first + (1.0 - total);
        }
        debug_assert_eq!(out.iter().sum::<f64>(), 1.0);
        return;
    }
}

/// ℓ2,1 norm: the sum of column Euclidean norms.
pub fn l21_norm(w: &DMatrix<f64>) -> Result<f64> {
    ensure_finite(w, "l21 input")?;
    Ok(w.column_iter().map(|c| c.norm()).sum())
}

/// Per-column IRLS weights phi_j = 1 / (2·max(‖w_j‖, eps)). The eps floor
/// keeps the weights finite at exactly-zero columns.
pub fn l21_reweight(w: &DMatrix<f64>, eps: f64) -> Result<DVector<f64>> {
    ensure_finite(w, "reweight input")?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidConfig(format!("reweight eps must be positive, got {eps}")));
    }
    Ok(DVector::from_iterator(
        w.ncols(),
        w.column_iter().map(|c| 1.0 / (2.0 * c.norm().max(eps))),
    ))
}

/// Solves M·X = Rhs for symmetric positive-definite M via Cholesky. M is
/// symmetrized as (M + Mᵀ)/2 first so that the last-ulp asymmetry a product
/// like X·Xᵀ can carry never reaches the factorization.
pub fn spd_solve(m: &DMatrix<f64>, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = m.nrows();
    if m.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "spd matrix must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if rhs.nrows() != d {
        return Err(Error::DimensionMismatch(format!(
            "rhs has {} rows, expected {d}",
            rhs.nrows()
        )));
    }
    ensure_finite(m, "spd matrix")?;
    ensure_finite(rhs, "spd rhs")?;
    let sym = (m + m.transpose()) * 0.5;
    let chol = sym.cholesky().ok_or(Error::NotPositiveDefinite)?;
    Ok(chol.solve(rhs))
}
