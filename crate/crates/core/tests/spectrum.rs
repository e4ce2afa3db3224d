mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use taxis_hopf::spectrum::*;

#[test]
fn first_twenty_modes_are_orthonormal() {
    let radius = 10.0;
    let cache = ModeCache::new(radius, 8, 6);
    let modes: Vec<EigenMode> = cache.sorted().into_iter().take(20).collect();
    let q = PolarQuadrature::new(radius, 96, 48);
    let mut fields = Vec::new();
    for e in &modes {
        fields.push(q.sample(|r, t| Complex64::new(e.cos_fn(r, t), 0.0)));
        if e.n > 0 {
            fields.push(q.sample(|r, t| Complex64::new(e.sin_fn(r, t), 0.0)));
        }
    }
    let mut worst: f64 = 0.0;
    for (i, a) in fields.iter().enumerate() {
        for (j, b) in fields.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((inner_product(&q, a, b).unwrap() - want).norm());
        }
    }
    assert!(worst < 1e-10, "{worst:e}");
}

#[test]
fn derivative_zeros_match_oracle() {
    for n in 0..=5 {
        let got = bessel_jprime_zeros(n, 6);
        let want = oracle_jprime_zeros(n, 6);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-10, "n={n}: {g} vs {w}");
        }
    }
}

#[test]
fn eigenvalues_are_sorted_and_neumann() {
    let cache = ModeCache::new(3.0, 5, 5);
    let sorted = cache.sorted();
    assert!(sorted.windows(2).all(|w| w[0].lambda <= w[1].lambda));
    for e in sorted {
        assert!(e.neumann_residual().abs() < 1e-10);
    }
}

proptest! {
    #[test]
    fn bessel_matches_integral_oracle(n in 0u32..8, x in 0.0f64..40.0) {
        let j = bessel_j(n, x).unwrap();
        let dj = bessel_jprime(n, x).unwrap();
        prop_assert!((j - oracle_j(n, x)).abs() < 1e-12);
        prop_assert!((dj - oracle_jprime(n, x)).abs() < 1e-12);
    }

    #[test]
    fn bessel_recurrence(n in 1u32..10, x in 0.1f64..50.0) {
        let lhs = bessel_j(n - 1, x).unwrap() + bessel_j(n + 1, x).unwrap();
        let rhs = 2.0 * n as f64 / x * bessel_j(n, x).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-11 * (1.0 + rhs.abs()));
    }
}
