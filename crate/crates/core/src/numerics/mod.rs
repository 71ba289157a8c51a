//! Small self-contained numerical kernels.

pub mod fit;
pub mod quadrature;
pub mod roots;
pub mod signed_log;
pub mod tridiag;

/// Trapezoidal inner product on a (possibly nonuniform) grid.
pub fn trapz_dot(x: &[f64], u: &[f64], v: &[f64]) -> f64 {
    debug_assert!(x.len() == u.len() && x.len() == v.len());
    let mut s = 0.0;
    for i in 0..x.len() - 1 {
        let h = x[i + 1] - x[i];
        s += 0.5 * h * (u[i] * v[i] + u[i + 1] * v[i + 1]);
    }
    s
}

/// Trapezoidal L2 norm.
pub fn trapz_norm(x: &[f64], u: &[f64]) -> f64 {
    trapz_dot(x, u, u).sqrt()
}

/// Trapezoidal weights (control-volume widths) for every node.
pub fn trapz_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let h = x[i + 1] - x[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

/// Linear interpolation of nodal values at `xq`; `x` must be increasing.
pub fn interp_linear(x: &[f64], y: &[f64], xq: f64) -> f64 {
    let n = x.len();
    if xq <= x[0] {
        return y[0];
    }
    if xq >= x[n - 1] {
        return y[n - 1];
    }
    let j = x.partition_point(|&xi| xi <= xq) - 1;
    let t = (xq - x[j]) / (x[j + 1] - x[j]);
    y[j] + t * (y[j + 1] - y[j])
}
