mod common;

use mfront_core::spectral::{eigen_leading, eigenvalues, sturm_count, Provenance, TridiagonalOperator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{dense_tridiagonal, jacobi_eigenvalues, random_tridiagonal};

#[test]
fn bisection_matches_dense_jacobi() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..50 {
        let (d, e) = random_tridiagonal(&mut rng, 200);
        let got = eigenvalues(&d, &e);
        let want = jacobi_eigenvalues(dense_tridiagonal(&d, &e));
        for (g, w) in got.iter().zip(&want) {
            let rel = (g - w).abs() / w.abs();
            assert!(rel <= 1e-10, "case {case}: {g} vs {w}");
        }
    }
}

#[test]
fn full_spectrum_by_inverse_iteration_keeps_trace_and_orthogonality() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let (d, e) = random_tridiagonal(&mut rng, 60);
        let n = d.len();
        let trace: f64 = d.iter().sum();
        let op = TridiagonalOperator::symmetric(d, e, 1.0, Provenance::N);
        let ep = eigen_leading(&op, n).unwrap();
        assert!((ep.values.iter().sum::<f64>() - trace).abs() <= 1e-12 * n as f64);
        for i in 0..n {
            for j in 0..n {
                let g: f64 = ep.vectors[i].iter().zip(&ep.vectors[j]).map(|(a, b)| a * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-10, "gram ({i},{j}) = {g}");
            }
        }
    }
}

#[test]
fn scaled_dirichlet_laplacian() {
    // eps d^2/dx^2 on (-1, 1), eps = 0.1
    let n = 2001;
    let h = 2.0 / (n - 1) as f64;
    let eps = 0.1;
    let m = n - 2;
    let c = eps / (h * h);
    let op = TridiagonalOperator::symmetric(vec![-2.0 * c; m], vec![c; m - 1], 1.0, Provenance::N);
    let ep = eigen_leading(&op, 4).unwrap();
    assert!((ep.values[0] + 0.246_740_110_027_233_97).abs() < 1e-4 * 0.2467);
    for k in 0..4 {
        let exact = -eps * ((k + 1) as f64 * std::f64::consts::PI / 2.0).powi(2);
        assert!(((ep.values[k] - exact) / exact).abs() < 1e-4);
    }
}

#[test]
fn sturm_count_brackets_every_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (d, e) = random_tridiagonal(&mut rng, 120);
    let ev = eigenvalues(&d, &e);
    for (j, v) in ev.iter().enumerate() {
        let pad = 1e-9 * v.abs().max(1.0);
        assert!(sturm_count(&d, &e, v - pad) <= j);
        assert!(sturm_count(&d, &e, v + pad) >= j + 1);
    }
}
