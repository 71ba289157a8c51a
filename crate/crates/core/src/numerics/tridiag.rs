//! Tridiagonal solvers: a reusable Thomas factorisation for diagonally
//! dominant systems and a partially pivoted LU for shifted (near singular)
//! systems in inverse iteration.

/// Thomas factorisation of a tridiagonal matrix with rows
/// `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1]` (`sub[0]`, `sup[n-1]` unused).
#[derive(Clone, Debug)]
pub struct Thomas {
    sub: Vec<f64>,
    cp: Vec<f64>,
    inv_den: Vec<f64>,
}

impl Thomas {
    pub fn new(sub: &[f64], diag: &[f64], sup: &[f64]) -> Self {
        let n = diag.len();
        let mut cp = vec![0.0; n];
        let mut inv_den = vec![0.0; n];
        inv_den[0] = 1.0 / diag[0];
        cp[0] = sup[0] * inv_den[0];
        for i in 1..n {
            let den = diag[i] - sub[i] * cp[i - 1];
            inv_den[i] = 1.0 / den;
            cp[i] = if i + 1 < n { sup[i] * inv_den[i] } else { 0.0 };
        }
        Thomas {
            sub: sub.to_vec(),
            cp,
            inv_den,
        }
    }

    /// Solve in place.
    pub fn solve(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        rhs[0] *= self.inv_den[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.sub[i] * rhs[i - 1]) * self.inv_den[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.cp[i] * rhs[i + 1];
        }
    }
}

/// LU with partial pivoting of a tridiagonal matrix; `lower[i]` couples rows
/// `i+1` and `i`, `upper[i]` couples rows `i` and `i+1`.
#[derive(Clone, Debug)]
pub struct PivotedLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl PivotedLu {
    /// Exact zero pivots are replaced by `tiny` so that inverse iteration
    /// at an exact eigenvalue still produces a direction.
    pub fn new(lower: &[f64], diag: &[f64], upper: &[f64], tiny: f64) -> Self {
        let n = diag.len();
        let mut dl = lower.to_vec();
        let mut d = diag.to_vec();
        let mut du = upper.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        PivotedLu {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    pub fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}
