//! Symmetric tridiagonal eigensolver: Sturm bisection for values, inverse
//! iteration with re-orthogonalisation for vectors.

use crate::numerics::tridiag::PivotedLu;
use crate::{Error, Result};

use super::operator::TridiagonalOperator;

const MAX_INVERSE_ITERATIONS: usize = 50;

/// Eigenpairs in descending order of eigenvalue.
#[derive(Clone, Debug)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    /// Unit Euclidean vectors, first significant component positive.
    pub vectors: Vec<Vec<f64>>,
    pub iterations: Vec<usize>,
    /// `||T v - lambda v||_2`.
    pub residuals: Vec<f64>,
}

struct Sturm<'a> {
    diag: &'a [f64],
    off2: Vec<f64>,
    pivmin: f64,
}

impl<'a> Sturm<'a> {
    fn new(diag: &'a [f64], off: &[f64]) -> Self {
        let off2: Vec<f64> = off.iter().map(|e| e * e).collect();
        let pivmin = f64::MIN_POSITIVE * off2.iter().cloned().fold(1.0, f64::max);
        Sturm { diag, off2, pivmin }
    }

    /// Number of eigenvalues strictly below `x`.
    fn count(&self, x: f64) -> usize {
        let mut q = self.diag[0] - x;
        let mut c = 0;
        if q.abs() < self.pivmin {
            q = -self.pivmin;
        }
        if q < 0.0 {
            c += 1;
        }
        for i in 1..self.diag.len() {
            q = self.diag[i] - x - self.off2[i - 1] / q;
            if q.abs() < self.pivmin {
                q = -self.pivmin;
            }
            if q < 0.0 {
                c += 1;
            }
        }
        c
    }
}

/// Number of eigenvalues of the symmetric tridiagonal `(diag, off)` below `x`.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    Sturm::new(diag, off).count(x)
}

fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let pad = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + f64::MIN_POSITIVE;
    (lo - pad, hi + pad)
}

/// The `j`-th smallest eigenvalue (0-based) to full working precision.
fn bisect_index(s: &Sturm, j: usize, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..2200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
        if s.count(mid) <= j {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All eigenvalues, ascending.
pub fn eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let s = Sturm::new(diag, off);
    let (lo, hi) = gershgorin(diag, off);
    (0..diag.len()).map(|j| bisect_index(&s, j, lo, hi)).collect()
}

fn start_vector(n: usize, seed: u64) -> Vec<f64> {
    // xorshift; any vector not orthogonal to the target works
    let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    (0..n)
        .map(|_| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            0.5 + (s >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(v, q);
            v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
    }
}

/// Flip so that the first component above `1e-8 max|v|` is positive.
pub fn fix_sign(v: &mut [f64]) {
    let m = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-8 * m) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// The `k` algebraically largest eigenpairs of a symmetric operator.
pub fn eigen_leading(op: &TridiagonalOperator, k: usize) -> Result<Eigenpairs> {
    if !op.symmetric {
        return Err(Error::InvalidInput("eigen_leading needs a symmetric operator".into()));
    }
    let n = op.dim;
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("requested {k} eigenpairs of a {n}x{n} matrix")));
    }
    let off = op.off_diag();
    let s = Sturm::new(&op.diag, off);
    let (glo, ghi) = gershgorin(&op.diag, off);
    let tnorm = op.norm_inf().max(f64::MIN_POSITIVE);
    let target = 4.0 * f64::EPSILON * tnorm * (n as f64).sqrt();

    let mut values = Vec::with_capacity(k);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut iterations = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for j in 0..k {
        let lambda = bisect_index(&s, n - 1 - j, glo, ghi);
        let tiny = f64::EPSILON * tnorm;
        let shifted: Vec<f64> = op.diag.iter().map(|d| d - lambda).collect();
        let lu = PivotedLu::new(off, &shifted, off, tiny);
        let mut x = start_vector(n, j as u64 + 1);
        orthogonalize(&mut x, &vectors);
        let nx = norm(&x);
        x.iter_mut().for_each(|v| *v /= nx);
        let mut best = f64::INFINITY;
        let mut extra = 0;
        let mut its = 0;
        loop {
            its += 1;
            let mut y = x.clone();
            lu.solve(&mut y);
            orthogonalize(&mut y, &vectors);
            let ny = norm(&y);
            if !(ny.is_finite() && ny > 0.0) {
                return Err(Error::Convergence(format!("inverse iteration broke down for eigenpair {}", j + 1)));
            }
            y.iter_mut().for_each(|v| *v /= ny);
            x = y;
            let tx = op.apply(&x);
            let r = norm(&tx.iter().zip(&x).map(|(a, b)| a - lambda * b).collect::<Vec<_>>());
            best = best.min(r);
            if r <= target {
                extra += 1;
                if extra >= 2 {
                    break;
                }
            }
            if its >= MAX_INVERSE_ITERATIONS {
                if best <= 1e3 * target {
                    break;
                }
                return Err(Error::Convergence(format!(
                    "inverse iteration for eigenpair {} stagnated at residual {best:.3e} after {its} iterations",
                    j + 1
                )));
            }
        }
        fix_sign(&mut x);
        let tx = op.apply(&x);
        let r = norm(&tx.iter().zip(&x).map(|(a, b)| a - lambda * b).collect::<Vec<_>>());
        values.push(lambda);
        vectors.push(x);
        iterations.push(its);
        residuals.push(r);
    }
    Ok(Eigenpairs {
        values,
        vectors,
        iterations,
        residuals,
    })
}
