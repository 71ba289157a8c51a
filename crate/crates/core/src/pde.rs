//! IMEX finite-volume solver for the full problem, interface extraction and
//! perturbation diagnostics.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::numerics::tridiag::Thomas;
use crate::numerics::{trapz_dot, trapz_norm};
use crate::problem::{FluxKind, FluxSpec, ProblemSpec};
use crate::reduced::{InterfaceTrajectory, TrajectorySource};
use crate::spectral::{interior_volumes, spectrum_of_l, SpectrumResult};
use crate::steady::{build_approx_member, equilibrium_interface, ApproxSteadyState};
use crate::{Error, Result};

/// Convective discretisation. Both use the local Lax-Friedrichs flux.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Piecewise-constant states: first order, numerical viscosity `|f'| h / 2`.
    ImexLlf,
    /// Minmod-limited piecewise-linear states: second order away from extrema.
    #[default]
    ImexLlfMuscl,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Cadence {
    /// `count` log-spaced times from `t_first` to `t_end`.
    Log { t_first: f64, count: usize },
    Every { interval: f64 },
    Times { times: Vec<f64> },
}

impl Default for Cadence {
    fn default() -> Self {
        Cadence::Log {
            t_first: 1e-2,
            count: 100,
        }
    }
}

impl Cadence {
    /// Snapshot times in `(0, t_end]`, increasing, always ending at `t_end`.
    pub fn times(&self, t_end: f64) -> Vec<f64> {
        let mut v: Vec<f64> = match self {
            Cadence::Log { t_first, count } => {
                let c = (*count).max(2);
                let (a, b) = (t_first.min(t_end).ln(), t_end.ln());
                (0..c).map(|i| (a + (b - a) * i as f64 / (c - 1) as f64).exp()).collect()
            }
            Cadence::Every { interval } => {
                let m = (t_end / interval).floor() as usize;
                (1..=m).map(|i| i as f64 * interval).collect()
            }
            Cadence::Times { times } => times.iter().cloned().filter(|&t| t > 0.0 && t <= t_end).collect(),
        };
        v.retain(|t| *t > 0.0 && *t <= t_end);
        if v.last().map_or(true, |l| *l < t_end) {
            v.push(t_end);
        }
        v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
        if let Some(l) = v.last_mut() {
            *l = t_end;
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    /// Time step; `0.25 h / max|f'|` when absent.
    pub dt: Option<f64>,
    pub t_end: f64,
    pub cfl_safety: f64,
    pub snapshots: Cadence,
    pub scheme: Scheme,
    /// Number of spectral coefficients per snapshot.
    pub spectral_k: usize,
    /// Extract the interface and diagnostics at snapshots.
    pub extract: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            dt: None,
            t_end: 100.0,
            cfl_safety: 0.9,
            snapshots: Cadence::default(),
            scheme: Scheme::default(),
            spectral_k: 4,
            extract: true,
        }
    }
}

/// Time level with boundary-flux bookkeeping.
#[derive(Clone, Debug)]
pub struct State {
    pub t: f64,
    pub u: Vec<f64>,
    /// Mass that entered through the boundaries (plus reaction source) so far.
    pub inflow: f64,
}

impl State {
    pub fn new(u: Vec<f64>) -> Self {
        State { t: 0.0, u, inflow: 0.0 }
    }
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Precomputed IMEX stepper.
#[derive(Clone, Debug)]
pub struct Stepper {
    flux: FluxSpec,
    kind: FluxKind,
    scheme: Scheme,
    x: Vec<f64>,
    vol: Vec<f64>,
    /// `eps a_f / h_f` per face.
    cond: Vec<f64>,
    dt: f64,
    implicit: Thomas,
    scratch: Vec<f64>,
    faces: Vec<f64>,
}

impl Stepper {
    pub fn new(spec: &ProblemSpec, cfg: &IntegratorConfig, u0: &[f64]) -> Result<Self> {
        let x = spec.nodes().to_vec();
        let n = x.len();
        if u0.len() != n {
            return Err(Error::InvalidInput(format!("initial datum has {} samples, grid has {n}", u0.len())));
        }
        if !(cfg.cfl_safety > 0.0 && cfg.cfl_safety <= 0.9) {
            return Err(Error::InvalidInput(format!("cfl_safety {} outside (0, 0.9]", cfg.cfl_safety)));
        }
        let fl = spec.flux.clone();
        let kind = fl.kind();
        let lo = u0.iter().cloned().fold(fl.u_plus.min(fl.u_minus), f64::min);
        let hi = u0.iter().cloned().fold(fl.u_plus.max(fl.u_minus), f64::max);
        let speed = (0..=400)
            .map(|k| fl.df(lo + (hi - lo) * k as f64 / 400.0).abs())
            .fold(0.0, f64::max);
        let hmin = spec.grid.widths().iter().cloned().fold(f64::INFINITY, f64::min);
        let limit = match kind {
            FluxKind::Conservation => cfg.cfl_safety * hmin / speed.max(1e-300),
            // explicit source: |g'| dt stays below the safety factor
            FluxKind::Reaction => cfg.cfl_safety / speed.max(1e-300),
        };
        let dt = match cfg.dt {
            Some(dt) => {
                if !(dt > 0.0) {
                    return Err(Error::InvalidInput(format!("dt = {dt} must be positive")));
                }
                if dt > limit {
                    return Err(Error::Cfl { dt, limit });
                }
                dt
            }
            None => match kind {
                FluxKind::Conservation => 0.25 * hmin / speed.max(1e-300),
                FluxKind::Reaction => 0.25 / speed.max(1e-300),
            },
        };
        let cond: Vec<f64> = (0..n - 1)
            .map(|j| spec.epsilon * spec.a(0.5 * (x[j] + x[j + 1])) / (x[j + 1] - x[j]))
            .collect();
        let vol = interior_volumes(&x);
        let m = n - 2;
        let mut sub = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut sup = vec![0.0; m];
        for r in 0..m {
            let i = r + 1;
            let (cl, cr) = (cond[i - 1], cond[i]);
            diag[r] = 1.0 + dt * (cl + cr) / vol[r];
            sub[r] = -dt * cl / vol[r];
            sup[r] = -dt * cr / vol[r];
        }
        Ok(Stepper {
            flux: fl,
            kind,
            scheme: cfg.scheme,
            implicit: Thomas::new(&sub, &diag, &sup),
            scratch: vec![0.0; m],
            faces: vec![0.0; n - 1],
            x,
            vol,
            cond,
            dt,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Control-volume mass of the interior nodes.
    pub fn mass(&self, u: &[f64]) -> f64 {
        self.vol.iter().zip(&u[1..]).map(|(w, v)| w * v).sum()
    }

    fn convective_faces(&mut self, u: &[f64]) {
        let n = u.len();
        let fl = &self.flux;
        let x = &self.x;
        for j in 0..n - 1 {
            let (mut ul, mut ur) = (u[j], u[j + 1]);
            if self.scheme == Scheme::ImexLlfMuscl {
                if j >= 1 {
                    let s = minmod(
                        (u[j] - u[j - 1]) / (x[j] - x[j - 1]),
                        (u[j + 1] - u[j]) / (x[j + 1] - x[j]),
                    );
                    ul += s * 0.5 * (x[j + 1] - x[j]);
                }
                if j + 2 < n {
                    let s = minmod(
                        (u[j + 1] - u[j]) / (x[j + 1] - x[j]),
                        (u[j + 2] - u[j + 1]) / (x[j + 2] - x[j + 1]),
                    );
                    ur -= s * 0.5 * (x[j + 1] - x[j]);
                }
            }
            let alpha = fl.df(ul).abs().max(fl.df(ur).abs());
            self.faces[j] = 0.5 * (fl.f(ul) + fl.f(ur)) - 0.5 * alpha * (ur - ul);
        }
    }

    /// Advance one step; boundary values stay pinned.
    pub fn step(&mut self, state: &mut State) -> Result<()> {
        let n = state.u.len();
        let dt = self.dt;
        let u = &state.u;
        let m = n - 2;
        let mut source = 0.0;
        match self.kind {
            FluxKind::Conservation => {
                self.convective_faces(u);
                for r in 0..m {
                    let i = r + 1;
                    self.scratch[r] = u[i] - dt * (self.faces[i] - self.faces[i - 1]) / self.vol[r];
                }
            }
            FluxKind::Reaction => {
                for r in 0..m {
                    let g = self.flux.f(u[r + 1]);
                    self.scratch[r] = u[r + 1] - dt * g;
                    source -= dt * g * self.vol[r];
                }
            }
        }
        self.scratch[0] += dt * self.cond[0] * u[0] / self.vol[0];
        self.scratch[m - 1] += dt * self.cond[n - 2] * u[n - 1] / self.vol[m - 1];
        self.implicit.solve(&mut self.scratch);
        if let Some(bad) = self.scratch.iter().position(|v| !v.is_finite()) {
            return Err(Error::BlowUp {
                t: state.t + dt,
                last_t: state.t,
                last_u: {
                    log::error!("non-finite value at node {} after t = {}", bad + 1, state.t);
                    state.u.clone()
                },
            });
        }
        let (conv_l, conv_r) = match self.kind {
            FluxKind::Conservation => (self.faces[0], self.faces[n - 2]),
            FluxKind::Reaction => (0.0, 0.0),
        };
        let left = conv_l - self.cond[0] * (self.scratch[0] - u[0]);
        let right = conv_r - self.cond[n - 2] * (u[n - 1] - self.scratch[m - 1]);
        state.inflow += dt * (left - right) + source;
        state.u[1..n - 1].copy_from_slice(&self.scratch);
        state.t += dt;
        Ok(())
    }
}

/// One step with a fresh stepper (convenience; loops should reuse a `Stepper`).
pub fn step(spec: &ProblemSpec, state: &mut State, cfg: &IntegratorConfig) -> Result<()> {
    Stepper::new(spec, cfg, &state.u)?.step(state)
}

#[derive(Clone, Debug, Serialize)]
pub struct Extraction {
    pub xi_hat: f64,
    /// `<psi_1(xi_hat), u - U(xi_hat)>`.
    pub residual: f64,
    /// Secant failed; `xi_hat` is the crossing estimate.
    pub degraded: bool,
    pub iterations: usize,
    pub crossing: f64,
}

/// Unique crossing of `u*` inside the admissible band, by linear
/// interpolation between bracketing nodes.
pub fn crossing(spec: &ProblemSpec, u: &[f64]) -> Result<f64> {
    let us = spec.flux.critical()?;
    let x = spec.nodes();
    let band = spec.admissible_limit() * (1.0 - 1e-12);
    let mut found = Vec::new();
    for i in 0..u.len() - 1 {
        let (a, b) = (u[i] - us, u[i + 1] - us);
        if a == 0.0 && i > 0 {
            continue;
        }
        if a * b < 0.0 || (b == 0.0 && i + 2 == u.len()) || (a == 0.0) {
            let c = if a == b { x[i] } else { x[i] + (x[i + 1] - x[i]) * a / (a - b) };
            found.push(c);
        } else if b == 0.0 {
            // exact hit at node i+1: count once if the sign actually changes
            let c2 = u.get(i + 2).map(|v| v - us).unwrap_or(0.0);
            if a * c2 < 0.0 {
                found.push(x[i + 1]);
            }
        }
    }
    match found.as_slice() {
        [] => Err(Error::Extraction(format!("profile never crosses u* = {us}"))),
        [c] if c.abs() <= band => Ok(*c),
        [c] => Err(Error::Extraction(format!("crossing {c:.6} lies outside the admissible band {band:.6}"))),
        many => Err(Error::Extraction(format!("{} crossings of u* = {us}", many.len()))),
    }
}

fn projection(spec: &ProblemSpec, u: &[f64], xi: f64) -> Result<(f64, f64)> {
    let m = build_approx_member(spec, xi)?;
    let r = spectrum_of_l(spec, &m, 1)?;
    let v: Vec<f64> = u.iter().zip(&m.profile).map(|(a, b)| a - b).collect();
    let x = spec.nodes();
    Ok((trapz_dot(x, &r.psi[0], &v), trapz_norm(x, &v)))
}

/// Solve `<psi_1(xi), u - U(xi)> = 0` by safeguarded secant from the crossing.
pub fn extract_interface(spec: &ProblemSpec, u: &[f64]) -> Result<Extraction> {
    let c = crossing(spec, u)?;
    let band = spec.admissible_limit() * (1.0 - 1e-12);
    let clampb = |v: f64| v.clamp(-band, band);
    let max_step = 0.5 * spec.epsilon;
    let degrade = |it: usize| {
        log::debug!("secant extraction did not converge; using the crossing {c}");
        Ok(Extraction {
            xi_hat: c,
            residual: projection(spec, u, c).map(|p| p.0).unwrap_or(f64::NAN),
            degraded: true,
            iterations: it,
            crossing: c,
        })
    };
    let (mut x0, (mut g0, nv)) = (c, projection(spec, u, c)?);
    let tol = |nv: f64| 1e-7 * nv + 1e-13;
    if g0.abs() <= tol(nv) {
        return Ok(Extraction {
            xi_hat: c,
            residual: g0,
            degraded: false,
            iterations: 0,
            crossing: c,
        });
    }
    let mut x1 = clampb(c + 1e-3 * spec.epsilon.min(band));
    if x1 == x0 {
        x1 = clampb(c - 1e-3 * spec.epsilon.min(band));
    }
    let (mut g1, mut n1) = match projection(spec, u, x1) {
        Ok(p) => p,
        Err(_) => return degrade(1),
    };
    for it in 1..=40 {
        if g1.abs() <= tol(n1) {
            return Ok(Extraction {
                xi_hat: x1,
                residual: g1,
                degraded: false,
                iterations: it,
                crossing: c,
            });
        }
        if g1 == g0 {
            return degrade(it);
        }
        let step = (-g1 * (x1 - x0) / (g1 - g0)).clamp(-max_step, max_step);
        let x2 = clampb(x1 + step);
        if (x2 - x1).abs() <= 1e-14 * spec.ell() {
            return Ok(Extraction {
                xi_hat: x2,
                residual: g1,
                degraded: false,
                iterations: it,
                crossing: c,
            });
        }
        let (g2, n2) = match projection(spec, u, x2) {
            Ok(p) => p,
            Err(_) => return degrade(it),
        };
        (x0, g0) = (x1, g1);
        (x1, g1, n1) = (x2, g2, n2);
    }
    degrade(40)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Diagnostics {
    pub v_l2: f64,
    pub v_linf: f64,
    /// `||v_x||_{L2}`.
    pub dv_l2: f64,
    /// `<psi_k, v>`, `k = 1..K`.
    pub coefficients: Vec<f64>,
    /// `|<d_xi psi_1, v>|`.
    pub coupling: f64,
}

/// Norms and spectral coefficients of `v = u - U(xi_hat)` (the member
/// the spectrum was computed about).
pub fn perturbation_diagnostics(
    spec: &ProblemSpec,
    u: &[f64],
    member: &ApproxSteadyState,
    spectrum: &SpectrumResult,
) -> Result<Diagnostics> {
    let x = spec.nodes();
    let v: Vec<f64> = u.iter().zip(&member.profile).map(|(a, b)| a - b).collect();
    let n = x.len();
    let dv: Vec<f64> = (0..n - 1).map(|i| (v[i + 1] - v[i]) / (x[i + 1] - x[i])).collect();
    let dv_l2 = (0..n - 1)
        .map(|i| dv[i] * dv[i] * (x[i + 1] - x[i]))
        .sum::<f64>()
        .sqrt();
    let coefficients: Vec<f64> = spectrum.psi.iter().map(|p| trapz_dot(x, p, &v)).collect();
    let coupling = if v.iter().all(|e| *e == 0.0) {
        0.0
    } else {
        let h = crate::steady::family_step(spec);
        let xi = member.xi;
        let pm = |s: f64| -> Result<Vec<f64>> {
            let m = build_approx_member(spec, xi + s * h)?;
            Ok(spectrum_of_l(spec, &m, 1)?.psi.remove(0))
        };
        let (a, b) = (pm(1.0)?, pm(-1.0)?);
        let dpsi: Vec<f64> = a.iter().zip(&b).map(|(p, q)| (p - q) / (2.0 * h)).collect();
        trapz_dot(x, &dpsi, &v).abs()
    };
    Ok(Diagnostics {
        v_l2: trapz_norm(x, &v),
        v_linf: v.iter().fold(0.0, |a, e| a.max(e.abs())),
        dv_l2,
        coefficients,
        coupling,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Snapshot {
    pub t: f64,
    #[serde(skip)]
    pub u: Vec<f64>,
    pub xi_hat: Option<f64>,
    pub degraded: bool,
    pub v1_resid: f64,
    pub diagnostics: Option<Diagnostics>,
    /// `(M(t) - M(0) - inflow) / max(1, |M(0)|)`.
    pub mass_defect: f64,
}

impl Snapshot {
    pub fn write_csv<W: Write>(&self, w: W, x: &[f64]) -> io::Result<()> {
        crate::io::write_columns(w, &["x", "u"], &[x, &self.u])
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub snapshots: Vec<Snapshot>,
    pub trajectory: InterfaceTrajectory,
    pub dt: f64,
    pub steps: u64,
    pub max_mass_defect: f64,
}

impl RunResult {
    /// Columns `t, xi_hat, v_L2, v_Linf, dv_L2, v1_resid` (extracted snapshots).
    pub fn write_trajectory_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        use crate::io::fmt_f64;
        writeln!(w, "t,xi_hat,v_L2,v_Linf,dv_L2,v1_resid")?;
        for s in &self.snapshots {
            if let (Some(xi), Some(d)) = (s.xi_hat, &s.diagnostics) {
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    fmt_f64(s.t),
                    fmt_f64(xi),
                    fmt_f64(d.v_l2),
                    fmt_f64(d.v_linf),
                    fmt_f64(d.dv_l2),
                    fmt_f64(s.v1_resid)
                )?;
            }
        }
        Ok(())
    }
}

fn observe(spec: &ProblemSpec, t: f64, u: &[f64], k: usize) -> Result<(Extraction, Diagnostics)> {
    let e = extract_interface(spec, u)?;
    let m = build_approx_member(spec, e.xi_hat)?;
    let s = spectrum_of_l(spec, &m, k.max(1))?;
    let d = perturbation_diagnostics(spec, u, &m, &s)?;
    log::debug!("t = {t:.4e}: xi_hat = {:.8}, |v|_2 = {:.3e}", e.xi_hat, d.v_l2);
    Ok((e, d))
}

/// Integrate from `u0` to `t_end`, recording snapshots.
pub fn run_experiment(spec: &ProblemSpec, u0: &[f64], cfg: &IntegratorConfig) -> Result<RunResult> {
    let fl = &spec.flux;
    let n = u0.len();
    if u0[0] != fl.u_minus || u0[n - 1] != fl.u_plus {
        return Err(Error::InvalidInput(format!(
            "initial datum has boundary values ({}, {}), expected ({}, {})",
            u0[0],
            u0[n - 1],
            fl.u_minus,
            fl.u_plus
        )));
    }
    if !(cfg.t_end > 0.0) {
        return Err(Error::InvalidInput(format!("t_end = {} must be positive", cfg.t_end)));
    }
    let mut stepper = Stepper::new(spec, cfg, u0)?;
    let dt = stepper.dt();
    let mut state = State::new(u0.to_vec());
    let m0 = stepper.mass(u0);
    let mut steps = 0u64;
    let mut snapshots = Vec::new();
    let mut max_defect: f64 = 0.0;
    for target in cfg.snapshots.times(cfg.t_end) {
        // land on the snapshot time with a shortened final step
        while state.t < target - 1e-12 * target {
            if state.t + stepper.dt > target {
                let full = stepper.dt;
                let mut short = stepper.clone();
                short.rescale(target - state.t);
                short.step(&mut state)?;
                stepper.dt = full;
            } else {
                stepper.step(&mut state)?;
            }
            steps += 1;
        }
        let defect = (stepper.mass(&state.u) - m0 - state.inflow) / m0.abs().max(1.0);
        max_defect = max_defect.max(defect.abs());
        let mut snap = Snapshot {
            t: state.t,
            u: state.u.clone(),
            xi_hat: None,
            degraded: false,
            v1_resid: f64::NAN,
            diagnostics: None,
            mass_defect: defect,
        };
        if cfg.extract {
            let (e, d) = observe(spec, state.t, &state.u, cfg.spectral_k)?;
            snap.xi_hat = Some(e.xi_hat);
            snap.degraded = e.degraded;
            snap.v1_resid = d.coefficients[0];
            snap.diagnostics = Some(d);
        }
        snapshots.push(snap);
    }
    let xs = equilibrium_interface(spec).unwrap_or(0.0);
    let (times, xi): (Vec<f64>, Vec<f64>) = snapshots
        .iter()
        .filter_map(|s| s.xi_hat.map(|x| (s.t, x)))
        .unzip();
    let trajectory = InterfaceTrajectory::from_samples(times, xi, xs, TrajectorySource::Pde);
    Ok(RunResult {
        snapshots,
        trajectory,
        dt,
        steps,
        max_mass_defect: max_defect,
    })
}

impl Stepper {
    /// Refactor the implicit system for a different step.
    fn rescale(&mut self, dt: f64) {
        let m = self.vol.len();
        let mut sub = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut sup = vec![0.0; m];
        for r in 0..m {
            let (cl, cr) = (self.cond[r], self.cond[r + 1]);
            diag[r] = 1.0 + dt * (cl + cr) / self.vol[r];
            sub[r] = -dt * cl / self.vol[r];
            sup[r] = -dt * cr / self.vol[r];
        }
        self.implicit = Thomas::new(&sub, &diag, &sup);
        self.dt = dt;
    }
}

/// Smoothed step from `u_-` to `u_+` centred at `x0` with width `w`.
pub fn smoothed_step(spec: &ProblemSpec, x0: f64, w: f64) -> Vec<f64> {
    let fl = &spec.flux;
    let x = spec.nodes();
    let n = x.len();
    let mut u: Vec<f64> = x
        .iter()
        .map(|&xx| {
            let s = 0.5 * (1.0 - ((xx - x0) / w).tanh());
            fl.u_plus + (fl.u_minus - fl.u_plus) * s
        })
        .collect();
    u[0] = fl.u_minus;
    u[n - 1] = fl.u_plus;
    u
}

/// Member profile plus `amp * exp(-((x - c)/w)^2)` vanishing at the ends.
pub fn member_plus_bump(spec: &ProblemSpec, xi: f64, amp: f64, c: f64, w: f64) -> Result<Vec<f64>> {
    let m = build_approx_member(spec, xi)?;
    let x = spec.nodes();
    let n = x.len();
    let mut u: Vec<f64> = m
        .profile
        .iter()
        .zip(x)
        .map(|(p, &xx)| p + amp * (-((xx - c) / w).powi(2)).exp())
        .collect();
    u[0] = spec.flux.u_minus;
    u[n - 1] = spec.flux.u_plus;
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::DiffusionModel;
    use crate::steady::build_exact_steady;

    fn burgers(eps: f64, n: usize) -> ProblemSpec {
        ProblemSpec::burgers(eps, 1.0, n, DiffusionModel::Constant { value: 1.0 }).unwrap()
    }

    #[test]
    fn constant_state_is_fixed() {
        let s = burgers(0.1, 101);
        for scheme in [Scheme::ImexLlf, Scheme::ImexLlfMuscl] {
            let mut st = State::new(vec![0.4; 101]);
            let cfg = IntegratorConfig {
                scheme,
                ..Default::default()
            };
            let mut stp = Stepper::new(&s, &cfg, &st.u).unwrap();
            for _ in 0..100 {
                stp.step(&mut st).unwrap();
            }
            assert!(st.u.iter().all(|v| (v - 0.4).abs() < 1e-14));
        }
    }

    #[test]
    fn conservation_bookkeeping() {
        let s = burgers(0.1, 401);
        let u0 = smoothed_step(&s, 0.3, 0.1);
        let cfg = IntegratorConfig {
            t_end: 2.0,
            extract: false,
            snapshots: Cadence::Every { interval: 0.5 },
            ..Default::default()
        };
        let r = run_experiment(&s, &u0, &cfg).unwrap();
        assert!(r.max_mass_defect < 1e-12, "{}", r.max_mass_defect);
        for sn in &r.snapshots {
            assert_eq!(sn.u[0], 1.0);
            assert_eq!(sn.u[400], -1.0);
        }
    }

    #[test]
    fn exact_steady_state_is_preserved() {
        let s = burgers(0.1, 2001);
        let ex = build_exact_steady(&s).unwrap();
        let cfg = IntegratorConfig {
            t_end: 10.0,
            extract: false,
            snapshots: Cadence::Every { interval: 2.0 },
            ..Default::default()
        };
        let r = run_experiment(&s, &ex.profile, &cfg).unwrap();
        for sn in &r.snapshots {
            let d = sn.u.iter().zip(&ex.profile).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(d <= 1e-4 * 2.0, "t {}: {d}", sn.t);
        }
    }

    #[test]
    fn cfl_violation_rejected() {
        let s = burgers(0.1, 201);
        let u0 = smoothed_step(&s, 0.0, 0.1);
        let cfg = IntegratorConfig {
            dt: Some(0.1),
            ..Default::default()
        };
        assert!(matches!(Stepper::new(&s, &cfg, &u0), Err(Error::Cfl { .. })));
    }

    #[test]
    fn extraction_examples() {
        let s = burgers(0.1, 2001);
        let m = build_approx_member(&s, 0.2).unwrap();
        let e = extract_interface(&s, &m.profile).unwrap();
        assert!((e.xi_hat - 0.2).abs() < 1e-8 && !e.degraded);
        let x = s.nodes();
        let pert: Vec<f64> = m
            .profile
            .iter()
            .zip(x)
            .map(|(u, xx)| u + 1e-3 * (std::f64::consts::PI * xx).sin())
            .collect();
        let e = extract_interface(&s, &pert).unwrap();
        assert!((e.xi_hat - 0.2).abs() < 1e-2);
        let (_, nv) = projection(&s, &pert, e.xi_hat).unwrap();
        assert!(e.residual.abs() <= 1e-6 * nv + 1e-12);
        // antisymmetric datum
        let anti: Vec<f64> = x.iter().map(|xx| -(xx / 0.2).tanh() / (1.0f64 / 0.2).tanh()).collect();
        let e = extract_interface(&s, &anti).map_err(|e| e.to_string()).unwrap();
        assert!(e.xi_hat.abs() < 1e-10);
        // no crossing, several crossings
        assert!(matches!(extract_interface(&s, &vec![1.0; 2001]), Err(Error::Extraction(_))));
        let wiggle: Vec<f64> = x.iter().map(|xx| (8.0 * xx).cos()).collect();
        assert!(matches!(extract_interface(&s, &wiggle), Err(Error::Extraction(_))));
    }

    #[test]
    fn diagnostics_oracles() {
        let s = burgers(0.1, 1001);
        let m = build_approx_member(&s, 0.1).unwrap();
        let sp = spectrum_of_l(&s, &m, 4).unwrap();
        let d = perturbation_diagnostics(&s, &m.profile, &m, &sp).unwrap();
        assert_eq!(d.v_l2, 0.0);
        assert!(d.coefficients.iter().all(|c| *c == 0.0));
        let u: Vec<f64> = m.profile.iter().zip(&sp.phi[1]).map(|(a, b)| a + b).collect();
        let d = perturbation_diagnostics(&s, &u, &m, &sp).unwrap();
        assert!((d.coefficients[1] - 1.0).abs() < 1e-6);
        for k in [0, 2, 3] {
            assert!(d.coefficients[k].abs() < 1e-6);
        }
    }
}
