//! Exact steady state and the matched family `U(x; xi)`.
//!
//! On each side of the matching point the stationary equation reduces to
//! `eps a(x) U' = f(U) - k` (conservation kind). The left branch runs from
//! `u*` at `xi` back to `u_minus` at `-ell`, the right branch from `u*` to
//! `u_plus` at `ell`; each fixes its own constant `k`. The member has a kink
//! at `xi` with `eps a(xi) [U'] = k_minus - k_plus`, which vanishes only at
//! the equilibrium position.
//!
//! Branches are integrated outward from the matching point (the stable
//! direction) with RK4 in the deviation `w = U - u_boundary`, so states
//! exponentially close to the boundary values keep full relative precision.
//! The branch constants are written `k = f(u_boundary) + delta` and found by
//! bisection in `ln(delta)`.
//!
//! For the reaction kind, `eps (a U')' = g(U)`, the branch state is
//! `(w, F = eps a U')` and `k = -F(xi)`. This family is an extension of the
//! conservation-law construction; members carry `reaction_extension = true`.

use std::io::{self, Write};

use serde::Serialize;

use crate::numerics::quadrature::{integrate, QuadOptions};
use crate::numerics::roots::{bisect, bisect_log};
use crate::problem::{equilibrium_point, validate_hypotheses, FluxKind, ProblemSpec};
use crate::{Error, Result, SignedLog};

/// Constant of the exact steady state, `eps a U' = f(U) - k`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SteadyConstant {
    pub k: f64,
    /// `k - max(f(u_minus), f(u_plus))`, kept separately for precision.
    pub delta: f64,
    /// Saturation amplitude `s - u*` where `f(s) = k` on the `u_minus` side
    /// (the `kappa` of the tanh profile for Burgers).
    pub kappa: f64,
}

#[derive(Clone, Debug)]
pub struct ExactSteadyState {
    pub constant: SteadyConstant,
    pub profile: Vec<f64>,
    pub profile_deriv: Vec<f64>,
    /// From [`equilibrium_point`].
    pub x_star: f64,
    /// Where the profile equals `u*`.
    pub crossing: f64,
    pub boundary_residual: f64,
}

#[derive(Clone, Debug)]
pub struct ApproxSteadyState {
    pub xi: f64,
    /// Branch constants; conservation: `eps a U' = f(U) - k` on each side,
    /// reaction: `k = -eps a U'` at the matching point.
    pub k_minus: f64,
    pub k_plus: f64,
    /// Offsets `k_minus - f(u_minus)` and `k_plus - f(u_plus)` (conservation).
    pub delta_minus: f64,
    pub delta_plus: f64,
    /// Branch saturation amplitudes measured from `u*` (conservation kind).
    pub kappa_minus: Option<f64>,
    pub kappa_plus: Option<f64>,
    pub profile: Vec<f64>,
    pub profile_deriv: Vec<f64>,
    /// `[dU/dx]` across the matching point.
    pub jump: f64,
    /// Matching abscissa; equals `xi`.
    pub match_point: f64,
    /// Left minus right limit of `U` at the matching point.
    pub continuity_gap: f64,
    /// Largest branch miss of the boundary value before snapping
    /// (conservation kind).
    pub boundary_residual: f64,
    pub reaction_extension: bool,
}

impl ApproxSteadyState {
    /// `k_minus - k_plus = eps a(xi) [U']`, computed from the offsets.
    pub fn residual_mass_signed(&self, spec: &ProblemSpec) -> f64 {
        match spec.flux.kind() {
            FluxKind::Conservation => {
                let fl = &spec.flux;
                (fl.f(fl.u_minus) - fl.f(fl.u_plus)) + (self.delta_minus - self.delta_plus)
            }
            FluxKind::Reaction => self.k_minus - self.k_plus,
        }
    }

    pub fn write_csv<W: Write>(&self, w: W, spec: &ProblemSpec) -> io::Result<()> {
        write_profile_csv(w, spec.nodes(), &self.profile, &self.profile_deriv)
    }
}

impl ExactSteadyState {
    pub fn write_csv<W: Write>(&self, w: W, spec: &ProblemSpec) -> io::Result<()> {
        write_profile_csv(w, spec.nodes(), &self.profile, &self.profile_deriv)
    }
}

pub fn write_profile_csv<W: Write>(w: W, x: &[f64], u: &[f64], du: &[f64]) -> io::Result<()> {
    crate::io::write_columns(w, &["x", "U", "dU_dx"], &[x, u, du])
}

// ---------------------------------------------------------------- exact state

/// Parts of `Phi(k) = int_{u+}^{u-} ds / (k - f(s))` split at `u*`:
/// `(int_{u*}^{u-}, int_{u+}^{u*})`.
fn phi_parts(spec: &ProblemSpec, delta: f64) -> Result<(f64, f64)> {
    let fl = &spec.flux;
    let us = fl.critical()?;
    let (um, up) = (fl.u_minus, fl.u_plus);
    let top = fl.f(um).max(fl.f(up));
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-13,
        max_intervals: 4000,
    };
    // Near each end the integrand is 1/(d + c t); t = (d/c) expm1(sigma)
    // flattens it.
    let half = |u_b: f64, dir: f64| -> Result<f64> {
        let d = delta + (top - fl.f(u_b));
        let c = dir * fl.df(u_b);
        let span = (u_b - us).abs();
        let scale = d / c;
        let sigma_max = (span / scale).ln_1p();
        let r = integrate(
            |sigma| {
                let t = scale * sigma.exp_m1();
                let den = d + fl.increment(u_b, dir * t);
                scale * sigma.exp() / den
            },
            0.0,
            sigma_max,
            opts,
        )?;
        Ok(r.value)
    };
    Ok((half(um, 1.0)?, half(up, -1.0)?))
}

/// The constant `k` of the exact steady state from `Phi(k) = b(ell)/eps`.
pub fn solve_kappa_exact(spec: &ProblemSpec) -> Result<SteadyConstant> {
    if spec.flux.kind() != FluxKind::Conservation {
        return Err(Error::InvalidInput(
            "the integral relation for k applies to the conservation kind".into(),
        ));
    }
    validate_hypotheses(spec).ensure()?;
    let fl = &spec.flux;
    let target = spec.b_total() / spec.epsilon;
    let resid = |d: f64| -> f64 {
        match phi_parts(spec, d) {
            Ok((l, r)) => l + r - target,
            Err(_) => f64::NAN,
        }
    };
    let d_lo = 1e-300;
    if !(resid(d_lo) > 0.0) {
        return Err(Error::Convergence(format!(
            "k bracket: Phi stays below b(ell)/eps = {target:.6e} (eps too small for double precision)"
        )));
    }
    let mut d_hi = (fl.f(fl.u_minus) - fl.f(fl.critical()?)).abs().max(1.0);
    let mut tries = 0;
    while !(resid(d_hi) < 0.0) {
        d_hi *= 4.0;
        tries += 1;
        if tries > 200 {
            return Err(Error::Convergence("k bracket not found after expansion".into()));
        }
    }
    let delta = bisect_log(resid, d_lo, d_hi, 1e-15)?;
    let (l, r) = phi_parts(spec, delta)?;
    if ((l + r) - target).abs() > 1e-10 * target {
        return Err(Error::Convergence(format!(
            "Phi(k) = {:.15e} misses b(ell)/eps = {target:.15e}",
            l + r
        )));
    }
    let top = fl.f(fl.u_minus).max(fl.f(fl.u_plus));
    let k = top + delta;
    let kappa = fl.level_root(k, fl.u_minus)? - fl.critical()?;
    Ok(SteadyConstant { k, delta, kappa })
}

/// Position of the zero-jump member: where the exact steady state crosses
/// `u*` (conservation) or where `k_minus = k_plus` (reaction).
pub fn equilibrium_interface(spec: &ProblemSpec) -> Result<f64> {
    match spec.flux.kind() {
        FluxKind::Conservation => {
            let c = solve_kappa_exact(spec)?;
            let (left, _) = phi_parts(spec, c.delta)?;
            spec.b_inverse(spec.epsilon * left)
        }
        FluxKind::Reaction => {
            let lim = spec.ell() - spec.band();
            let jump = |xi: f64| match build_approx_member(spec, xi) {
                Ok(m) => m.residual_mass_signed(spec),
                Err(_) => f64::NAN,
            };
            bisect(jump, -0.999 * lim, 0.999 * lim, 1e-13 * spec.ell())
        }
    }
}

pub fn build_exact_steady(spec: &ProblemSpec) -> Result<ExactSteadyState> {
    if spec.flux.kind() == FluxKind::Reaction {
        let xi = equilibrium_interface(spec)?;
        let m = build_approx_member(spec, xi)?;
        let k = 0.5 * (m.k_minus + m.k_plus);
        return Ok(ExactSteadyState {
            constant: SteadyConstant {
                k,
                delta: f64::NAN,
                kappa: f64::NAN,
            },
            profile: m.profile,
            profile_deriv: m.profile_deriv,
            x_star: equilibrium_point(spec)?,
            crossing: xi,
            boundary_residual: m.boundary_residual,
        });
    }
    let c = solve_kappa_exact(spec)?;
    let fl = &spec.flux;
    let (um, up) = (fl.u_minus, fl.u_plus);
    let x = spec.nodes();
    let n = x.len();
    let top = fl.f(um).max(fl.f(up));
    let rhs = Rhs {
        spec,
        u_b: um,
        param: c.delta + (top - fl.f(um)),
        kind: FluxKind::Conservation,
    };
    let m = substeps(spec);
    let mut w = vec![0.0; n];
    let mut y = [0.0, 0.0];
    for i in 0..n - 1 {
        y = rk4_cell(&rhs, x[i], x[i + 1], y, m);
        w[i + 1] = y[0];
    }
    let u_end = um + w[n - 1];
    let resid = (u_end - up).abs();
    let tol = 1e-8 * (um - up);
    if resid > tol {
        return Err(Error::Accuracy {
            what: "right boundary value of the exact steady state".into(),
            residual: resid,
            tolerance: tol,
        });
    }
    let mut profile: Vec<f64> = w.iter().map(|wi| um + wi).collect();
    profile[n - 1] = up;
    let profile_deriv: Vec<f64> = (0..n)
        .map(|i| {
            let ui = profile[i];
            (-fl.increment(um, um - ui) - rhs.param) / (spec.epsilon * spec.a(x[i]))
        })
        .collect();
    let (left, _) = phi_parts(spec, c.delta)?;
    Ok(ExactSteadyState {
        constant: c,
        profile,
        profile_deriv,
        x_star: equilibrium_point(spec)?,
        crossing: spec.b_inverse(spec.epsilon * left)?,
        boundary_residual: resid,
    })
}

// ---------------------------------------------------------------- branches

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

/// Right-hand side in deviation variables.
struct Rhs<'a> {
    spec: &'a ProblemSpec,
    u_b: f64,
    /// conservation: `k - f(u_b)`; reaction: unused
    param: f64,
    kind: FluxKind,
}

impl Rhs<'_> {
    #[inline]
    fn eval(&self, x: f64, y: [f64; 2]) -> [f64; 2] {
        let ea = self.spec.epsilon * self.spec.a(x);
        match self.kind {
            FluxKind::Conservation => {
                // f(u_b + w) - k = -(f(u_b) - f(u_b + w)) - (k - f(u_b))
                let fw = -self.spec.flux.increment(self.u_b, -y[0]);
                [(fw - self.param) / ea, 0.0]
            }
            FluxKind::Reaction => [y[1] / ea, self.spec.flux.f(self.u_b + y[0])],
        }
    }
}

#[inline]
fn rk4_cell(rhs: &Rhs, x0: f64, x1: f64, mut y: [f64; 2], m: usize) -> [f64; 2] {
    let h = (x1 - x0) / m as f64;
    let mut x = x0;
    for _ in 0..m {
        let k1 = rhs.eval(x, y);
        let y2 = [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]];
        let k2 = rhs.eval(x + 0.5 * h, y2);
        let y3 = [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]];
        let k3 = rhs.eval(x + 0.5 * h, y3);
        let y4 = [y[0] + h * k3[0], y[1] + h * k3[1]];
        let k4 = rhs.eval(x + h, y4);
        y[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        y[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        x += h;
    }
    y
}

/// RK4 substeps per unit length so that `h * rate <= 0.02`.
fn substep_density(spec: &ProblemSpec) -> f64 {
    let fl = &spec.flux;
    let ea = spec.epsilon * spec.diffusion.alpha.max(1e-300);
    let rate = match fl.kind() {
        FluxKind::Conservation => fl.max_abs_df() / ea,
        FluxKind::Reaction => {
            let (lo, hi) = (fl.u_plus.min(fl.u_minus), fl.u_plus.max(fl.u_minus));
            let g1 = (0..=200)
                .map(|k| fl.df(lo + (hi - lo) * k as f64 / 200.0).abs())
                .fold(0.0, f64::max);
            (g1 / ea).sqrt()
        }
    };
    rate / 0.02
}

fn substeps(spec: &ProblemSpec) -> usize {
    let dens = substep_density(spec);
    (spec.grid.max_width() * dens).ceil().max(1.0) as usize
}

fn cell_substeps(dens: f64, width: f64) -> usize {
    (width.abs() * dens).ceil().max(1.0) as usize
}

/// Conservation branch: integrate from the matching point out to the
/// boundary, calling `record(i, y)` at each node passed. Returns the final
/// deviation `w`.
fn run_outward(
    spec: &ProblemSpec,
    side: Side,
    xi: f64,
    delta: f64,
    mut record: impl FnMut(usize, [f64; 2]),
) -> f64 {
    let fl = &spec.flux;
    let us = fl.u_star.unwrap_or(f64::NAN);
    let u_b = match side {
        Side::Left => fl.u_minus,
        Side::Right => fl.u_plus,
    };
    let rhs = Rhs {
        spec,
        u_b,
        param: delta,
        kind: FluxKind::Conservation,
    };
    let x = spec.nodes();
    let dens = substep_density(spec);
    let mut y = [us - u_b, 0.0];
    let mut xc = xi;
    let mut visit = |i: usize| {
        y = rk4_cell(&rhs, xc, x[i], y, cell_substeps(dens, x[i] - xc));
        xc = x[i];
        record(i, y);
    };
    match side {
        Side::Left => (0..x.partition_point(|&xv| xv < xi)).rev().for_each(&mut visit),
        Side::Right => (x.partition_point(|&xv| xv <= xi)..x.len()).for_each(&mut visit),
    }
    y[0]
}

/// Reaction branch: integrate from the boundary (where `w = 0` and
/// `F = -p`) in to the matching point. Returns `(w, F)` at `xi`; `w` is
/// `+-inf` when the orbit runs away.
fn run_inward(
    spec: &ProblemSpec,
    side: Side,
    xi: f64,
    p: f64,
    mut record: impl FnMut(usize, [f64; 2]),
) -> [f64; 2] {
    let fl = &spec.flux;
    let u_b = match side {
        Side::Left => fl.u_minus,
        Side::Right => fl.u_plus,
    };
    let rhs = Rhs {
        spec,
        u_b,
        param: 0.0,
        kind: FluxKind::Reaction,
    };
    let x = spec.nodes();
    let n = x.len();
    let dens = substep_density(spec);
    let guard = 10.0 * (fl.u_minus - fl.u_plus).abs();
    let order: Vec<usize> = match side {
        Side::Left => (0..x.partition_point(|&xv| xv < xi)).collect(),
        Side::Right => (x.partition_point(|&xv| xv <= xi)..n).rev().collect(),
    };
    let mut y = [0.0, -p];
    let mut xc = x[order[0]];
    for &i in &order {
        y = rk4_cell(&rhs, xc, x[i], y, cell_substeps(dens, x[i] - xc));
        xc = x[i];
        if !y[0].is_finite() || y[0].abs() > guard {
            let s = if y[0].is_nan() { -1.0 } else { y[0].signum() };
            return [s * f64::INFINITY, f64::NAN];
        }
        record(i, y);
    }
    rk4_cell(&rhs, xc, xi, y, cell_substeps(dens, xi - xc))
}

/// Shoot one branch. Returns the parameter (`delta` for conservation, the
/// boundary flux magnitude for reaction), the branch constant `k`, and the
/// miss of the far end condition.
fn shoot(spec: &ProblemSpec, side: Side, xi: f64) -> Result<(f64, f64, f64)> {
    let fl = &spec.flux;
    let us = fl.critical()?;
    let u_b = match side {
        Side::Left => fl.u_minus,
        Side::Right => fl.u_plus,
    };
    let resid = |p: f64| -> f64 {
        match fl.kind() {
            FluxKind::Conservation => run_outward(spec, side, xi, p, |_, _| {}),
            FluxKind::Reaction => u_b + run_inward(spec, side, xi, p, |_, _| {})[0] - us,
        }
    };
    // orient so that the residual increases with the parameter
    let sgn = match (fl.kind(), side) {
        (FluxKind::Conservation, Side::Left) | (FluxKind::Reaction, Side::Right) => 1.0,
        _ => -1.0,
    };
    let f = |p: f64| sgn * resid(p);
    let p_lo = 1e-300;
    if !(f(p_lo) < 0.0) {
        return Err(Error::Convergence(format!(
            "branch bracket at xi = {xi}: smallest constant already reaches the target state"
        )));
    }
    let span = (fl.u_minus - fl.u_plus).abs();
    let mut p_hi = match fl.kind() {
        FluxKind::Conservation => (fl.f(fl.u_minus) - fl.f(us)).abs().max(span).max(1.0),
        FluxKind::Reaction => spec.epsilon.sqrt() * span,
    };
    let mut tries = 0;
    while !(f(p_hi) > 0.0) {
        p_hi *= 4.0;
        tries += 1;
        if tries > 200 {
            return Err(Error::Convergence(format!("branch bracket not found at xi = {xi}")));
        }
    }
    let p = bisect_log(f, p_lo, p_hi, 1e-15)?;
    let k = match fl.kind() {
        FluxKind::Conservation => fl.f(u_b) + p,
        FluxKind::Reaction => -run_inward(spec, side, xi, p, |_, _| {})[1],
    };
    Ok((p, k, resid(p)))
}

pub fn build_approx_member(spec: &ProblemSpec, xi: f64) -> Result<ApproxSteadyState> {
    spec.check_admissible(xi)?;
    let fl = &spec.flux;
    let us = fl.critical()?;
    let (um, up) = (fl.u_minus, fl.u_plus);
    let kind = fl.kind();
    let (p_m, k_minus, miss_m) = shoot(spec, Side::Left, xi)?;
    let (p_p, k_plus, miss_p) = shoot(spec, Side::Right, xi)?;
    let x = spec.nodes();
    let n = x.len();
    let eps = spec.epsilon;
    let mut profile = vec![us; n];
    let mut profile_deriv = vec![0.0; n];
    {
        let mut rec = |u_b: f64, i: usize, y: [f64; 2]| {
            profile[i] = u_b + y[0];
            if kind == FluxKind::Reaction {
                profile_deriv[i] = y[1] / (eps * spec.a(x[i]));
            }
        };
        match kind {
            FluxKind::Conservation => {
                run_outward(spec, Side::Left, xi, p_m, |i, y| rec(um, i, y));
                run_outward(spec, Side::Right, xi, p_p, |i, y| rec(up, i, y));
            }
            FluxKind::Reaction => {
                run_inward(spec, Side::Left, xi, p_m, |i, y| rec(um, i, y));
                run_inward(spec, Side::Right, xi, p_p, |i, y| rec(up, i, y));
            }
        }
    }
    let boundary_residual = miss_m.abs().max(miss_p.abs());
    let tol = 1e-8 * (um - up);
    if boundary_residual > tol {
        return Err(Error::Accuracy {
            what: format!("branch end value at xi = {xi}"),
            residual: boundary_residual,
            tolerance: tol,
        });
    }
    profile[0] = um;
    profile[n - 1] = up;
    let (delta_minus, delta_plus) = match kind {
        FluxKind::Conservation => (p_m, p_p),
        FluxKind::Reaction => (f64::NAN, f64::NAN),
    };
    let slope = |i: usize, left: bool| -> f64 {
        let ea = eps * spec.a(x[i]);
        match (kind, left) {
            (FluxKind::Conservation, true) => (-fl.increment(um, um - profile[i]) - p_m) / ea,
            (FluxKind::Conservation, false) => (-fl.increment(up, up - profile[i]) - p_p) / ea,
            (FluxKind::Reaction, true) => -k_minus / ea,
            (FluxKind::Reaction, false) => -k_plus / ea,
        }
    };
    for i in 0..n {
        if x[i] == xi {
            profile_deriv[i] = 0.5 * (slope(i, true) + slope(i, false));
        } else if kind == FluxKind::Conservation {
            profile_deriv[i] = slope(i, x[i] < xi);
        }
    }
    // conservation branches start at u* and miss the boundary; reaction
    // branches start at the boundary and miss u*
    let (boundary_residual, continuity_gap) = match kind {
        FluxKind::Conservation => (boundary_residual, 0.0),
        FluxKind::Reaction => (0.0, miss_m - miss_p),
    };
    let mut member = ApproxSteadyState {
        xi,
        k_minus,
        k_plus,
        delta_minus,
        delta_plus,
        kappa_minus: None,
        kappa_plus: None,
        profile,
        profile_deriv,
        jump: 0.0,
        match_point: xi,
        continuity_gap,
        boundary_residual,
        reaction_extension: kind == FluxKind::Reaction,
    };
    member.jump = member.residual_mass_signed(spec) / (eps * spec.a(xi));
    if kind == FluxKind::Conservation {
        member.kappa_minus = Some(fl.level_root(k_minus, um)? - us);
        member.kappa_plus = Some(us - fl.level_root(k_plus, up)?);
    }
    Ok(member)
}

/// Residual mass `Omega(xi) = |k_minus - k_plus| = eps a(xi) |[U']|`.
pub fn omega_residual(member: &ApproxSteadyState, spec: &ProblemSpec) -> SignedLog {
    SignedLog::from_f64(member.residual_mass_signed(spec)).abs()
}

/// Default family step `max(1e-6, 1e-4 eps)`.
pub fn family_step(spec: &ProblemSpec) -> f64 {
    (1e-4 * spec.epsilon).max(1e-6)
}

/// `dU/dxi` by central differences; second-order one-sided differences
/// when `xi + dxi` or `xi - dxi` leaves the admissible band.
pub fn family_derivative(spec: &ProblemSpec, xi: f64) -> Result<Vec<f64>> {
    family_derivative_with_step(spec, xi, family_step(spec))
}

pub fn family_derivative_with_step(spec: &ProblemSpec, xi: f64, dxi: f64) -> Result<Vec<f64>> {
    let lim = spec.admissible_limit();
    let combine = |a: &[f64], b: &[f64], c: &[f64], w: [f64; 3]| -> Vec<f64> {
        (0..a.len())
            .map(|i| (w[0] * a[i] + w[1] * b[i] + w[2] * c[i]) / dxi)
            .collect()
    };
    if (xi + dxi).abs() < lim && (xi - dxi).abs() < lim {
        let up = build_approx_member(spec, xi + dxi)?;
        let dn = build_approx_member(spec, xi - dxi)?;
        return Ok(up
            .profile
            .iter()
            .zip(&dn.profile)
            .map(|(a, b)| (a - b) / (2.0 * dxi))
            .collect());
    }
    let dir = if (xi + dxi).abs() < lim { 1.0 } else { -1.0 };
    let m0 = build_approx_member(spec, xi)?;
    let m1 = build_approx_member(spec, xi + dir * dxi)?;
    let m2 = build_approx_member(spec, xi + 2.0 * dir * dxi)?;
    let d = combine(&m0.profile, &m1.profile, &m2.profile, [-1.5, 2.0, -0.5]);
    Ok(d.into_iter().map(|v| dir * v).collect())
}
