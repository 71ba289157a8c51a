//! Finite-volume linearisation about a family member and its symmetric form.

use serde::Serialize;

use crate::problem::{FluxKind, ProblemSpec};
use crate::steady::ApproxSteadyState;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Provenance {
    /// The nonsymmetric linearised operator `L`.
    L,
    /// The symmetric similarity transform `N = eps D^-1 L D`.
    N,
}

/// Tridiagonal matrix on the interior nodes (Dirichlet rows eliminated).
#[derive(Clone, Debug)]
pub struct TridiagonalOperator {
    pub dim: usize,
    pub diag: Vec<f64>,
    /// Entry `(i+1, i)`.
    pub lower: Vec<f64>,
    /// Entry `(i, i+1)`; identical to `lower` when `symmetric`.
    pub upper: Vec<f64>,
    pub symmetric: bool,
    /// Viscosity the operator was built with.
    pub scale: f64,
    pub provenance: Provenance,
    /// Fewer than five nodes resolve the layer.
    pub coarse_layer: bool,
}

impl TridiagonalOperator {
    pub fn symmetric(diag: Vec<f64>, off: Vec<f64>, scale: f64, provenance: Provenance) -> Self {
        assert_eq!(off.len() + 1, diag.len());
        TridiagonalOperator {
            dim: diag.len(),
            upper: off.clone(),
            lower: off,
            diag,
            symmetric: true,
            scale,
            provenance,
            coarse_layer: false,
        }
    }

    pub fn off_diag(&self) -> &[f64] {
        &self.upper
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.lower[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    /// Infinity norm.
    pub fn norm_inf(&self) -> f64 {
        let n = self.dim;
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.lower[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.upper[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim;
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = self.diag[i];
            if i + 1 < n {
                m[i][i + 1] = self.upper[i];
                m[i + 1][i] = self.lower[i];
            }
        }
        m
    }

    /// Exact diagonal similarity `D^-1 T D` to symmetric form, scaled by
    /// `factor`. Returns the symmetric matrix and `ln d_i`, shifted so that
    /// `ln d_anchor = 0`. Needs `T_{i,i+1} T_{i+1,i} > 0`.
    pub fn symmetrized(&self, factor: f64, anchor: usize, provenance: Provenance) -> Result<(Self, Vec<f64>)> {
        let n = self.dim;
        let mut off = vec![0.0; n.saturating_sub(1)];
        let mut logd = vec![0.0; n];
        for i in 0..n.saturating_sub(1) {
            let p = self.lower[i];
            let q = self.upper[i];
            if !(p * q > 0.0) {
                return Err(Error::Accuracy {
                    what: format!(
                        "off-diagonal pair ({p:.3e}, {q:.3e}) at row {i} has no real symmetrisation; \
                         cell Peclet number reaches 1"
                    ),
                    residual: 1.0,
                    tolerance: 1.0,
                });
            }
            off[i] = factor * p.signum() * (p * q).sqrt();
            logd[i + 1] = logd[i] + 0.5 * (p / q).ln();
        }
        let a = logd[anchor.min(n - 1)];
        logd.iter_mut().for_each(|v| *v -= a);
        let diag = self.diag.iter().map(|d| factor * d).collect();
        let mut op = Self::symmetric(diag, off, self.scale, provenance);
        op.coarse_layer = self.coarse_layer;
        Ok((op, logd))
    }
}

/// Control-volume widths of the interior nodes.
pub fn interior_volumes(x: &[f64]) -> Vec<f64> {
    (1..x.len() - 1).map(|i| 0.5 * (x[i + 1] - x[i - 1])).collect()
}

/// Discretise `L v = eps (a v')' - (f'(U) v)'` (or `- g'(U) v`) about the
/// member on the interior nodes.
pub fn assemble_linearized(spec: &ProblemSpec, member: &ApproxSteadyState) -> TridiagonalOperator {
    let x = spec.nodes();
    let n = x.len();
    let dim = n - 2;
    let u = &member.profile;
    let eps = spec.epsilon;
    let fl = &spec.flux;
    let kind = fl.kind();
    // face i+1/2 for i = 0..n-2
    let mut dif = vec![0.0; n - 1];
    let mut conv = vec![0.0; n - 1];
    for i in 0..n - 1 {
        let h = x[i + 1] - x[i];
        dif[i] = eps * spec.a(0.5 * (x[i] + x[i + 1])) / h;
        if kind == FluxKind::Conservation {
            conv[i] = fl.df(0.5 * (u[i] + u[i + 1]));
        }
    }
    let vol = interior_volumes(x);
    let mut diag = vec![0.0; dim];
    let mut lower = vec![0.0; dim.saturating_sub(1)];
    let mut upper = vec![0.0; dim.saturating_sub(1)];
    for r in 0..dim {
        let i = r + 1;
        let w = vol[r];
        let (fm, fp) = (i - 1, i);
        let mut d = -(dif[fp] + dif[fm]) + 0.5 * (conv[fm] - conv[fp]);
        if kind == FluxKind::Reaction {
            d -= fl.df(u[i]) * w;
        }
        diag[r] = d / w;
        if r + 1 < dim {
            upper[r] = (dif[fp] - 0.5 * conv[fp]) / w;
        }
        if r > 0 {
            lower[r - 1] = (dif[fm] + 0.5 * conv[fm]) / w;
        }
    }
    let us = fl.u_star.unwrap_or(0.0);
    let half = 0.5 * (fl.u_minus - us).min(us - fl.u_plus);
    let in_layer = u.iter().filter(|&&v| (v - us).abs() < half).count();
    let coarse_layer = in_layer < 5;
    if coarse_layer {
        log::warn!("only {in_layer} nodes across the layer at eps = {eps}; refine the grid");
    }
    TridiagonalOperator {
        dim,
        diag,
        lower,
        upper,
        symmetric: false,
        scale: eps,
        provenance: Provenance::L,
        coarse_layer,
    }
}

/// Samples of the potential in `N = eps^2 (a psi')' - W psi`.
#[derive(Clone, Debug)]
pub struct PotentialW {
    /// `(1/a)(f'(U)/2)^2 + (eps/2) d/dx f'(U)` (centred differences) on every
    /// node; `eps g'(U)` for the reaction kind.
    pub formula: Vec<f64>,
    /// The potential the discrete `N` actually carries on interior nodes,
    /// i.e. `N = eps^2 d(a~ d) - W_h` with `a~ = a sqrt(1 - Pe^2)`.
    pub discrete: Vec<f64>,
    /// One-sided limits `W(xi-)`, `W(xi+)` from the branch slopes.
    pub at_match: (f64, f64),
}

impl PotentialW {
    /// Sign changes of `W + shift` closest to `xi` on each side (linear
    /// interpolation between nodes).
    pub fn zeros(&self, x: &[f64], xi: f64, shift: f64) -> (Option<f64>, Option<f64>) {
        let v: Vec<f64> = self.formula.iter().map(|w| w + shift).collect();
        let cross = |i: usize| x[i] + (x[i + 1] - x[i]) * v[i] / (v[i] - v[i + 1]);
        let left = (0..x.len() - 1)
            .rev()
            .filter(|&i| x[i + 1] < xi)
            .find(|&i| v[i].signum() != v[i + 1].signum())
            .map(cross);
        let right = (0..x.len() - 1)
            .filter(|&i| x[i] > xi)
            .find(|&i| v[i].signum() != v[i + 1].signum())
            .map(cross);
        (left, right)
    }
}

/// Potential and the symmetric operator `N` (exactly symmetric tridiagonal).
pub fn potential_and_selfadjoint(
    spec: &ProblemSpec,
    member: &ApproxSteadyState,
) -> Result<(PotentialW, TridiagonalOperator, Vec<f64>)> {
    let x = spec.nodes();
    let n = x.len();
    let eps = spec.epsilon;
    let fl = &spec.flux;
    let u = &member.profile;
    let l = assemble_linearized(spec, member);
    let anchor = x.partition_point(|&v| v < member.match_point).clamp(1, n - 2) - 1;
    let (nop, logd) = l.symmetrized(eps, anchor, Provenance::N)?;

    let formula: Vec<f64> = match fl.kind() {
        FluxKind::Conservation => {
            let c: Vec<f64> = u.iter().map(|&v| fl.df(v)).collect();
            (0..n)
                .map(|i| {
                    let dc = if i == 0 {
                        (c[1] - c[0]) / (x[1] - x[0])
                    } else if i == n - 1 {
                        (c[n - 1] - c[n - 2]) / (x[n - 1] - x[n - 2])
                    } else {
                        (c[i + 1] - c[i - 1]) / (x[i + 1] - x[i - 1])
                    };
                    (0.5 * c[i]).powi(2) / spec.a(x[i]) + 0.5 * eps * dc
                })
                .collect()
        }
        FluxKind::Reaction => u.iter().map(|&v| eps * fl.df(v)).collect(),
    };

    let vol = interior_volumes(x);
    let mut discrete = vec![0.0; n - 2];
    for r in 0..n - 2 {
        let i = r + 1;
        // diffusive part of N with the effective face coefficients
        let mut d2 = 0.0;
        for (face, other) in [(i - 1, r.checked_sub(1)), (i, (r + 1 < n - 2).then_some(r + 1))] {
            let h = x[face + 1] - x[face];
            let a_eff = match other {
                // recover a~ from the symmetric off-diagonal
                Some(o) => {
                    let off = nop.upper[r.min(o)];
                    off * h * (vol[r] * vol[o]).sqrt() / (eps * eps)
                }
                None => {
                    // boundary face: no partner row, use the unsymmetrised value
                    let a = spec.a(0.5 * (x[face] + x[face + 1]));
                    let c = if fl.kind() == FluxKind::Conservation {
                        fl.df(0.5 * (u[face] + u[face + 1]))
                    } else {
                        0.0
                    };
                    let pe = c * h / (2.0 * eps * a);
                    a * (1.0 - pe * pe).max(0.0).sqrt()
                }
            };
            d2 += a_eff / (h * vol[r]);
        }
        discrete[r] = -nop.diag[r] - eps * eps * d2;
    }

    let us = fl
        .critical()
        .unwrap_or_else(|_| crate::numerics::interp_linear(x, u, member.match_point));
    let at_match = match fl.kind() {
        FluxKind::Conservation => {
            let a = spec.a(member.match_point);
            let side = |k: f64| fl.df(us).powi(2) / (4.0 * a) + fl.d2f(us) * (fl.f(us) - k) / (2.0 * a);
            (side(member.k_minus), side(member.k_plus))
        }
        FluxKind::Reaction => (eps * fl.df(us), eps * fl.df(us)),
    };
    Ok((
        PotentialW {
            formula,
            discrete,
            at_match,
        },
        nop,
        logd,
    ))
}
