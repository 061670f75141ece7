//! Brute-force reference implementations for test suites.
//!
//! Everything here trades speed for transparency: exhaustive enumeration,
//! direct definitional formulas, dense loops. Nothing in this crate shares
//! code with the production kernels it checks, so agreement between the two
//! is evidence, not tautology. Inputs are deliberately tiny; callers own the
//! size caps.

use std::collections::HashMap;

/// Euclidean projection onto the probability simplex by exhaustive KKT
/// support enumeration: for every non-empty support set S the candidate is
/// z_i = y_i + (1 - Σ_{S} y)/|S| on S and 0 elsewhere; the feasible candidate
/// closest to y is the projection. Cost O(2^m · m); keep m ≤ 20.
pub fn simplex_projection_bruteforce(y: &[f64]) -> Vec<f64> {
    let m = y.len();
    assert!(m >= 1 && m <= 20, "support enumeration needs 1 ≤ m ≤ 20");
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << m) {
        let size = mask.count_ones() as f64;
        let sum: f64 = (0..m).filter(|&i| mask >> i & 1 == 1).map(|i| y[i]).sum();
        let shift = (1.0 - sum) / size;
        let mut z = vec![0.0; m];
        let mut feasible = true;
        for i in 0..m {
            if mask >> i & 1 == 1 {
                z[i] = y[i] + shift;
                if z[i] < -1e-12 {
                    feasible = false;
                    break;
                }
                z[i] = z[i].max(0.0);
            }
        }
        if !feasible {
            continue;
        }
        let cost: f64 = z.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().map_or(true, |(c, _)| cost < *c) {
            best = Some((cost, z));
        }
    }
    best.expect("the full support is always feasible").1
}

/// Minimizes ½ zᵀHz + gᵀz over the simplex by projected gradient descent,
/// using the enumeration projector above. H must be symmetric positive
/// semidefinite. Step size 1/L with L = ‖H‖_∞ (≥ spectral norm for
/// symmetric H).
pub fn simplex_qp_pg(h: &[Vec<f64>], g: &[f64], iters: usize) -> Vec<f64> {
    let m = g.len();
    assert!(h.len() == m && h.iter().all(|row| row.len() == m));
    let lip: f64 = h
        .iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(1e-12);
    let step = 1.0 / lip;
    let mut z = vec![1.0 / m as f64; m];
    for _ in 0..iters {
        let mut grad = g.to_vec();
        for i in 0..m {
            for j in 0..m {
                grad[i] += h[i][j] * z[j];
            }
        }
        let moved: Vec<f64> = z.iter().zip(&grad).map(|(zi, gi)| zi - step * gi).collect();
        z = simplex_projection_bruteforce(&moved);
    }
    z
}

/// Minimizes ½‖z − y‖² over the simplex by projected gradient with the
/// enumeration projector; a second independent route to the projection.
pub fn simplex_projection_pg(y: &[f64], iters: usize) -> Vec<f64> {
    let m = y.len();
    let mut z = vec![1.0 / m as f64; m];
    for _ in 0..iters {
        let moved: Vec<f64> = z.iter().zip(y).map(|(zi, yi)| zi - 0.9 * (zi - yi)).collect();
        z = simplex_projection_bruteforce(&moved);
    }
    z
}

/// Singular values of a 2×2 matrix from the characteristic polynomial of
/// BᵀB, descending.
pub fn singular_values_2x2(b: [[f64; 2]; 2]) -> [f64; 2] {
    let [[a, c], [d, e]] = b;
    let g00 = a * a + d * d;
    let g01 = a * c + d * e;
    let g11 = c * c + e * e;
    let trace = g00 + g11;
    let det = g00 * g11 - g01 * g01;
    let disc = (trace * trace - 4.0 * det).max(0.0).sqrt();
    let l1 = 0.5 * (trace + disc);
    let l2 = 0.5 * (trace - disc);
    [l1.max(0.0).sqrt(), l2.max(0.0).sqrt()]
}

/// Best orthogonal 2×2 Q maximizing Tr(QᵀB), found by scanning `steps`
/// rotation angles for both orientation classes. Returns (Q, trace).
pub fn procrustes_gridsearch_2x2(b: [[f64; 2]; 2], steps: usize) -> ([[f64; 2]; 2], f64) {
    let mut best = ([[1.0, 0.0], [0.0, 1.0]], f64::NEG_INFINITY);
    for i in 0..steps {
        let theta = std::f64::consts::TAU * i as f64 / steps as f64;
        let (s, c) = theta.sin_cos();
        for q in [[[c, -s], [s, c]], [[c, s], [s, -c]]] {
            let trace: f64 = (0..2).map(|r| (0..2).map(|l| q[r][l] * b[r][l]).sum::<f64>()).sum();
            if trace > best.1 {
                best = (q, trace);
            }
        }
    }
    best
}

/// Exhaustive minimum-cost assignment over all permutations. Returns
/// (row -> column permutation, total cost). Factorial cost; keep n ≤ 9.
pub fn assignment_bruteforce(cost: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let n = cost.len();
    assert!(n >= 1 && n <= 9 && cost.iter().all(|row| row.len() == n));
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best_perm = perm.clone();
    let mut best_cost = f64::INFINITY;
    permute(&mut perm, 0, &mut |p| {
        let total: f64 = p.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        if total < best_cost {
            best_cost = total;
            best_perm = p.to_vec();
        }
    });
    (best_perm, best_cost)
}

fn permute(xs: &mut [usize], at: usize, visit: &mut impl FnMut(&[usize])) {
    if at == xs.len() {
        visit(xs);
        return;
    }
    for i in at..xs.len() {
        xs.swap(at, i);
        permute(xs, at + 1, visit);
        xs.swap(at, i);
    }
}

/// Minimum k-means inertia over every assignment of points to k clusters
/// (centroids at cluster means). Cost k^n; keep n ≤ 10, k ≤ 4.
pub fn kmeans_inertia_bruteforce(points: &[Vec<f64>], k: usize) -> f64 {
    let n = points.len();
    let d = points[0].len();
    assert!(n >= 1 && k >= 1 && (k as f64).powi(n as i32) <= 2e6);
    let mut assign = vec![0usize; n];
    let mut best = f64::INFINITY;
    loop {
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (i, &a) in assign.iter().enumerate() {
            counts[a] += 1;
            for j in 0..d {
                sums[a][j] += points[i][j];
            }
        }
        let mut inertia = 0.0;
        for (i, &a) in assign.iter().enumerate() {
            for j in 0..d {
                let c = sums[a][j] / counts[a] as f64;
                inertia += (points[i][j] - c) * (points[i][j] - c);
            }
        }
        best = best.min(inertia);
        // odometer increment over base-k digits
        let mut pos = 0;
        loop {
            if pos == n {
                return best;
            }
            assign[pos] += 1;
            if assign[pos] < k {
                break;
            }
            assign[pos] = 0;
            pos += 1;
        }
    }
}

/// Clustering accuracy by exhaustive search over label mappings: the best
/// bijection between predicted and true label ids. Factorial in the label
/// count; keep it ≤ 8.
pub fn accuracy_bruteforce(y_true: &[usize], y_pred: &[usize]) -> f64 {
    assert_eq!(y_true.len(), y_pred.len());
    let n = y_true.len();
    assert!(n > 0);
    let s = y_true
        .iter()
        .chain(y_pred.iter())
        .max()
        .map(|&m| m + 1)
        .unwrap();
    assert!(s <= 8, "label alphabet too large for factorial search");
    let mut perm: Vec<usize> = (0..s).collect();
    let mut best = 0usize;
    permute(&mut perm, 0, &mut |p| {
        let hits = y_true
            .iter()
            .zip(y_pred)
            .filter(|&(&t, &q)| p[q] == t)
            .count();
        best = best.max(hits);
    });
    best as f64 / n as f64
}

fn pair_counts(y_true: &[usize], y_pred: &[usize]) -> (f64, f64, f64, f64) {
    let n = y_true.len();
    let (mut a, mut b, mut c, mut d) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let same_t = y_true[i] == y_true[j];
            let same_p = y_pred[i] == y_pred[j];
            match (same_t, same_p) {
                (true, true) => a += 1.0,
                (true, false) => b += 1.0,
                (false, true) => c += 1.0,
                (false, false) => d += 1.0,
            }
        }
    }
    (a, b, c, d)
}

/// Adjusted Rand index from the pair-count form
/// 2(ad − bc) / ((a+b)(b+d) + (a+c)(c+d)); 1.0 when the denominator
/// vanishes (both partitions induce the same trivial pair relation).
pub fn ari_bruteforce(y_true: &[usize], y_pred: &[usize]) -> f64 {
    assert_eq!(y_true.len(), y_pred.len());
    let (a, b, c, d) = pair_counts(y_true, y_pred);
    let den = (a + b) * (b + d) + (a + c) * (c + d);
    if den == 0.0 {
        return 1.0;
    }
    2.0 * (a * d - b * c) / den
}

/// Pairwise F-score from explicit pair enumeration; 0 when either pair set
/// is empty of agreements.
pub fn fscore_bruteforce(y_true: &[usize], y_pred: &[usize]) -> f64 {
    assert_eq!(y_true.len(), y_pred.len());
    let (a, b, c, _) = pair_counts(y_true, y_pred);
    if a == 0.0 {
        return 0.0;
    }
    let precision = a / (a + c);
    let recall = a / (a + b);
    2.0 * precision * recall / (precision + recall)
}

/// Normalized mutual information computed straight from definitional sums
/// over a hash-map contingency; natural log, geometric-mean normalization.
/// Conventions: 1.0 when both partitions are trivial (zero entropy both
/// sides), 0.0 when exactly one side has zero entropy.
pub fn nmi_bruteforce(y_true: &[usize], y_pred: &[usize]) -> f64 {
    assert_eq!(y_true.len(), y_pred.len());
    let n = y_true.len() as f64;
    let mut joint: HashMap<(usize, usize), f64> = HashMap::new();
    let mut left: HashMap<usize, f64> = HashMap::new();
    let mut right: HashMap<usize, f64> = HashMap::new();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        *joint.entry((t, p)).or_default() += 1.0;
        *left.entry(t).or_default() += 1.0;
        *right.entry(p).or_default() += 1.0;
    }
    let h = |m: &HashMap<usize, f64>| -> f64 {
        -m.values().map(|&c| c / n * (c / n).ln()).sum::<f64>()
    };
    let (hu, hv) = (h(&left), h(&right));
    if hu <= 0.0 && hv <= 0.0 {
        return 1.0;
    }
    if hu <= 0.0 || hv <= 0.0 {
        return 0.0;
    }
    let mut mi = 0.0;
    for (&(t, p), &c) in &joint {
        mi += c / n * ((c * n) / (left[&t] * right[&p])).ln();
    }
    mi / (hu * hv).sqrt()
}
