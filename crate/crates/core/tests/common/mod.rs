//! Dense reference routines used as oracles by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Eigenvalues of a dense symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(rows: Vec<Vec<f64>>) -> Vec<f64> {
    let n = rows.len();
    let mut a: Vec<f64> = rows.into_iter().flatten().collect();
    for _sweep in 0..100 {
        let mut off = 0.0;
        let mut diag = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    diag += a[i * n + i] * a[i * n + i];
                } else {
                    off += a[i * n + j] * a[i * n + j];
                }
            }
        }
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // rows p, q then the mirrored columns
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

pub fn dense_tridiagonal(diag: &[f64], off: &[f64]) -> Vec<Vec<f64>> {
    let n = diag.len();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        a[i][i] = diag[i];
        if i + 1 < n {
            a[i][i + 1] = off[i];
            a[i + 1][i] = off[i];
        }
    }
    a
}

/// Random symmetric tridiagonal with entries in `[-1, 1]`, dimension in `[1, max_dim]`.
pub fn random_tridiagonal(rng: &mut ChaCha8Rng, max_dim: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rng.gen_range(1..=max_dim);
    let diag = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let off = (0..n.saturating_sub(1)).map(|_| rng.gen_range(-1.0..1.0)).collect();
    (diag, off)
}

/// `-kappa tanh(kappa x / (2 eps))` with `kappa tanh(kappa ell / (2 eps)) = 1`,
/// kappa found by Newton from 1.
pub fn burgers_profile(eps: f64, ell: f64, x: &[f64]) -> (f64, Vec<f64>) {
    let mut k: f64 = 1.0;
    for _ in 0..100 {
        let z = k * ell / (2.0 * eps);
        let g = k * z.tanh() - 1.0;
        let dg = z.tanh() + z / z.cosh().powi(2);
        let step = g / dg;
        k -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    (k, x.iter().map(|&xx| -k * (k * xx / (2.0 * eps)).tanh()).collect())
}
