//! Property coverage for the numeric kernels: exact simplex feasibility and
//! idempotence, norm equivalences, surrogate consistency, and factorization
//! shape guarantees on arbitrary inputs.

use dscmc::numerics::{l21_norm, l21_reweight, orthogonal_procrustes, project_simplex, svd_thin};
use dscmc::rng::{domain, StreamRng};
use nalgebra::DMatrix;
use proptest::prelude::*;

proptest! {
    #[test]
    fn simplex_projection_is_feasible_and_exactly_idempotent(
        y in prop::collection::vec(-100.0f64..100.0, 1..12)
    ) {
        let z = project_simplex(&y).unwrap();
        prop_assert!(z.iter().all(|&v| v >= 0.0));
        prop_assert_eq!(z.iter().sum::<f64>(), 1.0);
        let again = project_simplex(&z).unwrap();
        for (a, b) in z.iter().zip(&again) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn simplex_projection_handles_extreme_scales(
        y in prop::collection::vec(prop_oneof![
            -1e12f64..1e12,
            -1e-12f64..1e-12,
            -10.0f64..10.0,
        ], 1..10)
    ) {
        let z = project_simplex(&y).unwrap();
        prop_assert!(z.iter().all(|&v| v >= 0.0));
        prop_assert_eq!(z.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn l21_norm_sits_between_frobenius_bounds(
        rows in 1usize..6,
        cols in 1usize..6,
        seed in 0u64..5000
    ) {
        let mut rng = StreamRng::new(seed, domain::TEST, 50);
        let w = DMatrix::from_fn(rows, cols, |_, _| rng.normal());
        let l21 = l21_norm(&w).unwrap();
        let fro = w.norm();
        prop_assert!(l21 >= fro - 1e-12 * (1.0 + fro));
        let upper = (cols as f64).sqrt() * fro;
        prop_assert!(l21 <= upper + 1e-12 * (1.0 + upper));
    }

    #[test]
    fn reweight_surrogate_restates_the_norm_above_the_floor(
        rows in 1usize..5,
        cols in 1usize..5,
        seed in 0u64..5000
    ) {
        // Columns bounded away from zero keep the eps floor inactive.
        let mut rng = StreamRng::new(seed, domain::TEST, 51);
        let w = DMatrix::from_fn(rows, cols, |_, _| 0.5 + rng.uniform() * 2.0);
        let phi = l21_reweight(&w, 1e-8).unwrap();
        let surrogate: f64 = w
            .column_iter()
            .enumerate()
            .map(|(j, c)| phi[j] * c.norm_squared())
            .sum();
        let l21 = l21_norm(&w).unwrap();
        prop_assert!((2.0 * surrogate - l21).abs() <= 1e-10 * (1.0 + l21));
    }

    #[test]
    fn svd_and_procrustes_shapes_hold_on_random_matrices(
        rows in 1usize..8,
        cols in 1usize..8,
        seed in 0u64..2000
    ) {
        let mut rng = StreamRng::new(seed, domain::TEST, 52);
        let b = DMatrix::from_fn(rows, cols, |_, _| rng.normal());
        let svd = svd_thin(&b).unwrap();
        let r = rows.min(cols);
        prop_assert_eq!(svd.u.shape(), (rows, r));
        prop_assert_eq!(svd.vt.shape(), (r, cols));
        for i in 1..r {
            prop_assert!(svd.singular_values[i - 1] >= svd.singular_values[i]);
        }
        let max_in = b.amax().max(1.0);
        prop_assert!((svd.reconstruct() - &b).amax() <= 1e-9 * max_in);
        if rows >= cols {
            let q = orthogonal_procrustes(&b).unwrap();
            let gram = q.transpose() * &q;
            prop_assert!((gram - DMatrix::identity(cols, cols)).amax() < 1e-8);
        }
    }
}

/// Seeded stress run for the exact-sum contract at volumes proptest's
/// shrinker would make slow: a hundred thousand projections across scales,
/// every one summing to exactly one and idempotent bit for bit.
#[test]
fn simplex_exactness_stress() {
    let mut rng = StreamRng::new(99, domain::TEST, 53);
    for case in 0..100_000u64 {
        let m = 1 + rng.index(10);
        let scale = 10.0f64.powi((rng.index(9) as i32) - 4);
        let y: Vec<f64> = (0..m).map(|_| (rng.uniform() * 2.0 - 1.0) * scale).collect();
        let z = project_simplex(&y).unwrap();
        let sum: f64 = z.iter().sum();
        assert_eq!(sum, 1.0, "case {case}: sum {sum:e} for input {y:?}");
        assert!(z.iter().all(|&v| v >= 0.0), "case {case}: negative part in {z:?}");
        let again = project_simplex(&z).unwrap();
        assert_eq!(z, again, "case {case}: not idempotent for {y:?}");
    }
}
