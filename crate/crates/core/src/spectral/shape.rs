//! Measured shape of `W + eps lambda` about the matching point.

use serde::Serialize;

use crate::problem::{FluxKind, ProblemSpec};
use crate::steady::ApproxSteadyState;

use super::operator::PotentialW;

#[derive(Clone, Debug, Serialize)]
pub struct ShapeReport {
    pub lambda: f64,
    /// `eps lambda + min_pm W(pm ell)`: positive when the shifted potential
    /// is positive near both boundaries, which every other conclusion needs.
    pub edge_margin: f64,
    /// Nonincreasing on `(-ell, xi)`.
    pub monotone_left: bool,
    /// Nondecreasing on `(xi, ell)`.
    pub monotone_right: bool,
    /// Smallest measured `c` with `W + eps lambda > 0` for `|x - xi| >= c eps`.
    pub c: Option<f64>,
    /// Minimum of `W + eps lambda` over that region.
    pub big_c: Option<f64>,
    pub y_minus: Option<f64>,
    pub y_plus: Option<f64>,
    /// `max |y_pm - xi| / eps`.
    pub c0: Option<f64>,
    /// One-sided `W(xi-) + eps lambda`, `W(xi+) + eps lambda`.
    pub at_match: (f64, f64),
}

impl ShapeReport {
    pub fn negative_at_match(&self) -> bool {
        self.at_match.0 < 0.0 && self.at_match.1 < 0.0
    }

    pub fn all_hold(&self) -> bool {
        self.edge_margin > 0.0
            && self.monotone_left
            && self.monotone_right
            && self.big_c.is_some_and(|c| c > 0.0)
            && self.c0.is_some()
            && self.negative_at_match()
    }
}

/// Check the monotonicity, positivity-away-from-the-layer and
/// negativity-at-the-matching-point conclusions for the shift `eps lambda`.
pub fn shape_checks(spec: &ProblemSpec, member: &ApproxSteadyState, w: &PotentialW, lambda: f64) -> ShapeReport {
    let x = spec.nodes();
    let n = x.len();
    let eps = spec.epsilon;
    let xi = member.match_point;
    let shift = eps * lambda;
    let v: Vec<f64> = w.formula.iter().map(|e| e + shift).collect();
    let scale = v.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(f64::MIN_POSITIVE);
    let tol = 1e-9 * scale;
    // the centred difference straddles the kink within one cell of xi
    let guard = 1.5 * spec.grid.max_width_near(xi, 2.0 * spec.grid.max_width());
    let monotone_left = (0..n - 1)
        .filter(|&i| x[i + 1] < xi - guard)
        .all(|i| v[i + 1] - v[i] <= tol);
    let monotone_right = (0..n - 1)
        .filter(|&i| x[i] > xi + guard)
        .all(|i| v[i + 1] - v[i] >= -tol);

    let edge = match spec.flux.kind() {
        FluxKind::Conservation => {
            let fl = &spec.flux;
            let l = fl.df(fl.u_minus).powi(2) / (4.0 * spec.a(-spec.ell()));
            let r = fl.df(fl.u_plus).powi(2) / (4.0 * spec.a(spec.ell()));
            l.min(r)
        }
        FluxKind::Reaction => eps * spec.flux.df(spec.flux.u_minus).min(spec.flux.df(spec.flux.u_plus)),
    };

    // outermost non-positive node sets c
    let reach = x
        .iter()
        .zip(&v)
        .filter(|(_, e)| **e <= 0.0)
        .map(|(xx, _)| (xx - xi).abs())
        .fold(0.0, f64::max);
    let outside: Vec<f64> = x
        .iter()
        .zip(&v)
        .filter(|(xx, _)| (**xx - xi).abs() > reach)
        .map(|(_, e)| *e)
        .collect();
    let (c, big_c) = if outside.is_empty() {
        (None, None)
    } else {
        (Some(reach / eps), Some(outside.iter().cloned().fold(f64::INFINITY, f64::min)))
    };
    let (y_minus, y_plus) = w.zeros(x, xi, shift);
    let c0 = match (y_minus, y_plus) {
        (Some(a), Some(b)) => Some((xi - a).max(b - xi) / eps),
        _ => None,
    };
    ShapeReport {
        lambda,
        edge_margin: shift + edge,
        monotone_left,
        monotone_right,
        c,
        big_c,
        y_minus,
        y_plus,
        c0,
        at_match: (w.at_match.0 + shift, w.at_match.1 + shift),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::DiffusionModel;
    use crate::spectral::{potential_and_selfadjoint, spectrum_of_l};
    use crate::steady::build_approx_member;

    #[test]
    fn burgers_conclusions_with_proxies() {
        let s = ProblemSpec::burgers(0.05, 1.0, 2001, DiffusionModel::Constant { value: 1.0 }).unwrap();
        let m = build_approx_member(&s, 0.2).unwrap();
        let (w, _, _) = potential_and_selfadjoint(&s, &m).unwrap();
        let r = spectrum_of_l(&s, &m, 2).unwrap();

        // lambda = 0 and lambda_1 proxies: every conclusion holds
        for lam in [0.0, r.eigenvalues[0]] {
            let rep = shape_checks(&s, &m, &w, lam);
            assert!(rep.all_hold(), "{rep:?}");
            assert!(rep.c0.unwrap() < 10.0);
            assert!(rep.c.unwrap() < 10.0);
        }

        // at lambda_2 the shift already exceeds the boundary value of W
        let rep = shape_checks(&s, &m, &w, r.eigenvalues[1]);
        assert!(rep.monotone_left && rep.monotone_right);
        assert!(rep.negative_at_match());
        assert!(rep.edge_margin < 0.0);
        assert!(rep.big_c.is_none() && rep.c0.is_none());
    }
}
