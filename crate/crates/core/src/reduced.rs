//! Interface speed and the reduced equation `xi' = theta(xi)`.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::io::fmt_f64;
use crate::numerics::fit::{linear_fit, LinearFit};
use crate::numerics::{interp_linear, trapz_dot};
use crate::problem::ProblemSpec;
use crate::spectral::{adjoint_eigenfunction_limit, spectrum_of_l};
use crate::steady::{build_approx_member, equilibrium_interface, family_derivative};
use crate::{Error, Result, SignedLog};

/// How the first adjoint eigenfunction enters `theta`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaMode {
    /// Recompute `psi_1` at every `xi`; normalise against `d_xi U`.
    #[default]
    Accurate,
    /// Closed-form small-viscosity `psi_1`, normalised against `-U_x`.
    Fast,
}

#[derive(Clone, Debug, Serialize)]
pub struct ThetaEval {
    pub xi: f64,
    pub theta: SignedLog,
    /// `k_- - k_+`, the mass of the residual concentrated at `xi`.
    pub mass: f64,
    pub psi_at_match: f64,
    pub normalization: f64,
}

/// `theta(xi) = (k_- - k_+) psi_1(xi) / <psi_1, d_xi U>`.
pub fn theta_eval(spec: &ProblemSpec, xi: f64, mode: ThetaMode) -> Result<ThetaEval> {
    let x = spec.nodes();
    let member = build_approx_member(spec, xi)?;
    let (psi, du) = match mode {
        ThetaMode::Accurate => {
            let r = spectrum_of_l(spec, &member, 1)?;
            (r.psi.into_iter().next().unwrap(), family_derivative(spec, xi)?)
        }
        ThetaMode::Fast => (
            adjoint_eigenfunction_limit(spec, xi)?,
            member.profile_deriv.iter().map(|v| -v).collect(),
        ),
    };
    let normalization = trapz_dot(x, &psi, &du);
    if !(normalization.abs() >= 1e-14) {
        return Err(Error::Transversality(normalization));
    }
    let psi_at_match = interp_linear(x, &psi, member.match_point);
    let mass = member.residual_mass_signed(spec);
    let theta = SignedLog::from_f64(mass).mul_f64(psi_at_match / normalization);
    Ok(ThetaEval {
        xi,
        theta,
        mass,
        psi_at_match,
        normalization,
    })
}

pub fn theta(spec: &ProblemSpec, xi: f64, mode: ThetaMode) -> Result<SignedLog> {
    theta_eval(spec, xi, mode).map(|e| e.theta)
}

#[derive(Clone, Debug, Serialize)]
pub struct SpeedMap {
    pub xi_grid: Vec<f64>,
    pub theta: Vec<SignedLog>,
    pub theta_prime_at_star: f64,
    pub xi_star: f64,
    pub mode: ThetaMode,
}

impl SpeedMap {
    /// Grid points where `(xi - xi*) theta(xi) < 0` fails.
    pub fn dissipativity_violations(&self) -> Vec<f64> {
        let tiny = 1e-9 * self.xi_grid.iter().fold(1.0f64, |a, x| a.max(x.abs()));
        self.xi_grid
            .iter()
            .zip(&self.theta)
            .filter(|(x, t)| {
                let d = **x - self.xi_star;
                d.abs() > tiny && d.signum() * t.sign as f64 >= 0.0
            })
            .map(|(x, _)| *x)
            .collect()
    }

    /// Columns `xi, sign_theta, log10_abs_theta`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "xi,sign_theta,log10_abs_theta")?;
        for (x, t) in self.xi_grid.iter().zip(&self.theta) {
            writeln!(w, "{},{},{}", fmt_f64(*x), t.sign, fmt_f64(t.log10_abs()))?;
        }
        Ok(())
    }
}

/// `count` equally spaced points strictly inside the admissible band.
pub fn admissible_grid(spec: &ProblemSpec, count: usize) -> Vec<f64> {
    let b = spec.admissible_limit() * (1.0 - 1e-9);
    if count == 1 {
        return vec![0.0];
    }
    (0..count)
        .map(|i| -b + 2.0 * b * i as f64 / (count - 1) as f64)
        .collect()
}

pub fn build_speed_map(spec: &ProblemSpec, xi_grid: &[f64], mode: ThetaMode) -> Result<SpeedMap> {
    let theta: Vec<SignedLog> = xi_grid
        .par_iter()
        .map(|&xi| theta(spec, xi, mode))
        .collect::<Result<_>>()?;
    let xi_star = equilibrium_interface(spec)?;
    let theta_prime_at_star = -decay_rate(spec, mode)?;
    Ok(SpeedMap {
        xi_grid: xi_grid.to_vec(),
        theta,
        theta_prime_at_star,
        xi_star,
        mode,
    })
}

/// `beta = -theta'(xi*)`, central difference with step `1e-3 ell`.
pub fn decay_rate(spec: &ProblemSpec, mode: ThetaMode) -> Result<f64> {
    let xs = equilibrium_interface(spec)?;
    let h = 1e-3 * spec.ell();
    let (tp, tm) = rayon::join(|| theta(spec, xs + h, mode), || theta(spec, xs - h, mode));
    let beta = tm?.sub(tp?).value() / (2.0 * h);
    if !(beta > 0.0) {
        return Err(Error::Hypothesis(format!(
            "decay rate beta = {beta:.3e} is not positive at xi* = {xs:.6}"
        )));
    }
    Ok(beta)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectorySource {
    Reduced,
    Pde,
}

#[derive(Clone, Copy, Debug)]
pub enum Stop {
    Time(f64),
    Target(f64),
}

#[derive(Clone, Copy, Debug)]
pub struct ReducedOptions {
    pub mode: ThetaMode,
    /// Relative tolerance of the adaptive quadrature for `t(xi)`.
    pub rel_tol: f64,
    /// Number of log-spaced output times.
    pub samples: usize,
    /// Closest approach to `xi*`, as a fraction of `ell`.
    pub floor: f64,
}

impl Default for ReducedOptions {
    fn default() -> Self {
        ReducedOptions {
            mode: ThetaMode::Accurate,
            rel_tol: 1e-8,
            samples: 200,
            floor: 1e-6,
        }
    }
}

/// Piecewise cubic Hermite `t(s)`, `s = ln|xi - xi*|`, with exact slopes.
#[derive(Clone, Debug)]
struct TimeMap {
    /// Decreasing `s`.
    s: Vec<f64>,
    t: Vec<f64>,
    /// `dt/ds` (negative).
    dt: Vec<f64>,
}

impl TimeMap {
    fn t_end(&self) -> f64 {
        *self.t.last().unwrap()
    }

    fn eval(&self, i: usize, s: f64) -> f64 {
        let (s0, s1) = (self.s[i], self.s[i + 1]);
        let h = s1 - s0;
        let u = (s - s0) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * u) * (1.0 - u).powi(2),
            u * (1.0 - u).powi(2),
            u * u * (3.0 - 2.0 * u),
            u * u * (u - 1.0),
        );
        h00 * self.t[i] + h10 * h * self.dt[i] + h01 * self.t[i + 1] + h11 * h * self.dt[i + 1]
    }

    /// `s` with `t(s) = target`, for `0 <= target <= t_end`.
    fn invert(&self, target: f64) -> f64 {
        let i = self.t.partition_point(|&v| v < target).clamp(1, self.t.len() - 1) - 1;
        let (mut lo, mut hi) = (self.s[i + 1], self.s[i]);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.eval(i, mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * mid.abs().max(1.0) {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

#[derive(Clone, Debug)]
pub struct InterfaceTrajectory {
    pub times: Vec<f64>,
    pub xi: Vec<f64>,
    pub provenance: TrajectorySource,
    pub xi_star: f64,
    /// Fitted exponential rate of the tail (`|xi - xi*| <= 0.1 |xi_0 - xi*|`).
    pub beta_fit: Option<LinearFit>,
    /// The run ended at the closest-approach floor before the requested stop.
    pub reached_floor: bool,
    map: Option<TimeMap>,
    sigma: f64,
}

impl InterfaceTrajectory {
    pub fn from_samples(times: Vec<f64>, xi: Vec<f64>, xi_star: f64, provenance: TrajectorySource) -> Self {
        let sigma = xi.first().map_or(1.0, |x| (x - xi_star).signum());
        let mut tr = InterfaceTrajectory {
            times,
            xi,
            provenance,
            xi_star,
            beta_fit: None,
            reached_floor: false,
            map: None,
            sigma,
        };
        tr.beta_fit = tr.fit_tail();
        tr
    }

    fn fit_tail(&self) -> Option<LinearFit> {
        let d0 = (self.xi.first()? - self.xi_star).abs();
        let (t, y): (Vec<f64>, Vec<f64>) = self
            .times
            .iter()
            .zip(&self.xi)
            .filter(|(_, x)| {
                let d = (**x - self.xi_star).abs();
                d > 0.0 && d <= 0.1 * d0
            })
            .map(|(t, x)| (*t, (x - self.xi_star).abs().ln()))
            .unzip();
        if t.len() < 3 {
            return None;
        }
        linear_fit(&t, &y).ok()
    }

    /// `xi(t)`; exact inversion of the quadrature map for reduced runs,
    /// linear interpolation of the samples otherwise.
    pub fn xi_at(&self, t: f64) -> f64 {
        match &self.map {
            Some(m) => {
                if t <= 0.0 {
                    return self.xi[0];
                }
                if t >= m.t_end() {
                    return *self.xi.last().unwrap();
                }
                self.xi_star + self.sigma * m.invert(t).exp()
            }
            None => interp_linear(&self.times, &self.xi, t),
        }
    }

    /// Time at which `|xi - xi*|` first drops to `fraction` of its initial value.
    pub fn time_to_fraction(&self, fraction: f64) -> Option<f64> {
        let d0 = (self.xi[0] - self.xi_star).abs();
        let target = fraction * d0;
        if let Some(m) = &self.map {
            let s = target.ln();
            if s < *m.s.last().unwrap() || s > m.s[0] {
                return None;
            }
            let i = m.s.partition_point(|&v| v > s).clamp(1, m.s.len() - 1) - 1;
            return Some(m.eval(i, s));
        }
        let d: Vec<f64> = self.xi.iter().map(|x| (x - self.xi_star).abs()).collect();
        let j = d.iter().position(|&v| v <= target)?;
        if j == 0 {
            return Some(self.times[0]);
        }
        let w = (d[j - 1] - target) / (d[j - 1] - d[j]);
        Some(self.times[j - 1] + w * (self.times[j] - self.times[j - 1]))
    }

    /// Columns `t, xi, log10_dist_to_star`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,xi,log10_dist_to_star")?;
        for (t, x) in self.times.iter().zip(&self.xi) {
            writeln!(
                w,
                "{},{},{}",
                fmt_f64(*t),
                fmt_f64(*x),
                fmt_f64((x - self.xi_star).abs().log10())
            )?;
        }
        Ok(())
    }
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
}

fn simpson(p: &Panel) -> f64 {
    (p.b - p.a) / 6.0 * (p.fa + 4.0 * p.fm + p.fb)
}

/// Adaptive Simpson; accepted panels are appended in order.
fn adapt<F: Fn(f64) -> Result<f64> + Sync>(
    g: &F,
    p: Panel,
    whole: f64,
    tol: f64,
    depth: usize,
    out: &mut Vec<(f64, f64, f64, f64, f64)>,
) -> Result<()> {
    let m = 0.5 * (p.a + p.b);
    let (fl, fr) = rayon::join(|| g(0.5 * (p.a + m)), || g(0.5 * (m + p.b)));
    let left = Panel {
        a: p.a,
        b: m,
        fa: p.fa,
        fm: fl?,
        fb: p.fm,
    };
    let right = Panel {
        a: m,
        b: p.b,
        fa: p.fm,
        fm: fr?,
        fb: p.fb,
    };
    let (sl, sr) = (simpson(&left), simpson(&right));
    if depth == 0 || (sl + sr - whole).abs() <= 15.0 * tol {
        out.push((left.a, left.b, left.fa, left.fb, sl + (sl + sr - whole) / 30.0));
        out.push((right.a, right.b, right.fa, right.fb, sr + (sl + sr - whole) / 30.0));
        return Ok(());
    }
    adapt(g, left, sl, 0.5 * tol, depth - 1, out)?;
    adapt(g, right, sr, 0.5 * tol, depth - 1, out)
}

/// Reduced trajectory from `xi0` by quadrature of `dt = dxi / theta(xi)`.
pub fn integrate_interface(spec: &ProblemSpec, xi0: f64, stop: Stop, opts: &ReducedOptions) -> Result<InterfaceTrajectory> {
    spec.check_admissible(xi0)?;
    let xs = equilibrium_interface(spec)?;
    let d0 = (xi0 - xs).abs();
    let floor = opts.floor * spec.ell();

    if d0 <= floor {
        if let Stop::Target(t) = stop {
            if (t - xs).abs() > floor {
                return Err(Error::Monotonicity(format!(
                    "target {t} differs from the equilibrium {xs} the trajectory starts at"
                )));
            }
        }
        let t_end = match stop {
            Stop::Time(t) => t,
            Stop::Target(_) => 0.0,
        };
        let mut tr = InterfaceTrajectory::from_samples(vec![0.0, t_end], vec![xi0, xi0], xs, TrajectorySource::Reduced);
        tr.beta_fit = None;
        return Ok(tr);
    }
    let sigma = (xi0 - xs).signum();
    let s0 = d0.ln();
    let mut s_end = floor.ln();
    if let Stop::Target(t) = stop {
        let dt = t - xs;
        if dt * sigma < 0.0 || dt.abs() > d0 {
            return Err(Error::Monotonicity(format!(
                "target {t} is not between xi0 = {xi0} and xi* = {xs}; the reduced flow cannot cross equilibrium"
            )));
        }
        s_end = s_end.max(dt.abs().ln());
    }

    let mode = opts.mode;
    // dt/ds magnitude: e^s / |theta|
    let g = |s: f64| -> Result<f64> {
        let xi = xs + sigma * s.exp();
        let th = theta(spec, xi, mode)?;
        if th.sign as f64 * sigma >= 0.0 {
            return Err(Error::Hypothesis(format!(
                "theta({xi:.6}) has sign {} on the side {sigma} of xi*; the flow is not dissipative",
                th.sign
            )));
        }
        Ok((s - th.ln_abs).exp())
    };

    // coarse panels first, in parallel
    let panels = 16usize;
    let pts: Vec<f64> = (0..=2 * panels)
        .map(|i| s0 + (s_end - s0) * i as f64 / (2 * panels) as f64)
        .collect();
    let vals: Vec<f64> = pts.par_iter().map(|&s| g(s)).collect::<Result<_>>()?;
    let coarse: Vec<Panel> = (0..panels)
        .map(|p| Panel {
            a: pts[2 * p],
            b: pts[2 * p + 2],
            fa: vals[2 * p],
            fm: vals[2 * p + 1],
            fb: vals[2 * p + 2],
        })
        .collect();
    // integrating toward smaller s: widths are negative, magnitudes positive
    let rough: f64 = coarse.iter().map(|p| -simpson(p)).sum();
    let tol = opts.rel_tol * rough / panels as f64;
    let pieces: Vec<Vec<(f64, f64, f64, f64, f64)>> = coarse
        .into_par_iter()
        .map(|p| {
            let mut out = Vec::new();
            let whole = simpson(&p);
            adapt(&g, p, whole, tol, 30, &mut out)?;
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut map = TimeMap {
        s: vec![s0],
        t: vec![0.0],
        dt: vec![-vals[0]],
    };
    for (_, b, _, fb, area) in pieces.into_iter().flatten() {
        let t = map.t.last().unwrap() - area;
        map.s.push(b);
        map.t.push(t);
        map.dt.push(-fb);
    }

    let (t_stop, reached_floor) = match stop {
        Stop::Time(t) => {
            if t > map.t_end() {
                (map.t_end(), true)
            } else {
                (t, false)
            }
        }
        Stop::Target(t) => (map.t_end(), (t - xs).abs() < floor),
    };
    let first = map.t[1].min(t_stop).max(f64::MIN_POSITIVE);
    let count = opts.samples.max(2);
    let mut times = vec![0.0];
    if t_stop > 0.0 {
        let (l0, l1) = (first.ln(), t_stop.ln());
        times.extend((0..count).map(|i| (l0 + (l1 - l0) * i as f64 / (count - 1) as f64).exp()));
        *times.last_mut().unwrap() = t_stop;
    }
    let xi: Vec<f64> = times
        .iter()
        .map(|&t| {
            if t == 0.0 {
                xi0
            } else {
                let i = map.t.partition_point(|&v| v < t);
                if i < map.t.len() && map.t[i] == t {
                    xs + sigma * map.s[i].exp()
                } else {
                    xs + sigma * map.invert(t).exp()
                }
            }
        })
        .collect();
    let mut tr = InterfaceTrajectory::from_samples(times, xi, xs, TrajectorySource::Reduced);
    tr.reached_floor = reached_floor;
    tr.map = Some(map);
    tr.sigma = sigma;
    Ok(tr)
}

/// Time to halve the distance from `xi0` to `xi*`.
pub fn halving_time(spec: &ProblemSpec, xi0: f64, opts: &ReducedOptions) -> Result<f64> {
    let xs = equilibrium_interface(spec)?;
    let tr = integrate_interface(spec, xi0, Stop::Target(xs + 0.5 * (xi0 - xs)), opts)?;
    Ok(*tr.times.last().unwrap())
}
