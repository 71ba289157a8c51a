//! Problem data: grid, diffusion coefficient, nonlinearity and boundary states.

use serde::{Deserialize, Serialize};

use crate::numerics::roots::bisect;
use crate::{Error, Result};

// ---------------------------------------------------------------- grid

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GridKind {
    Uniform,
    /// Node density `1 + (amplification - 1) sech^2((x - center)/width)`.
    Stretched {
        center: f64,
        width: f64,
        amplification: f64,
    },
}

impl Default for GridKind {
    fn default() -> Self {
        GridKind::Uniform
    }
}

#[derive(Clone, Debug)]
pub struct Grid1D {
    ell: f64,
    nodes: Vec<f64>,
    kind: GridKind,
}

impl Grid1D {
    pub fn uniform(ell: f64, n: usize) -> Result<Self> {
        Self::new(ell, n, &GridKind::Uniform)
    }

    pub fn new(ell: f64, n: usize, kind: &GridKind) -> Result<Self> {
        if !(ell > 0.0 && ell.is_finite()) {
            return Err(Error::InvalidInput(format!("ell must be positive, got {ell}")));
        }
        if n < 3 {
            return Err(Error::InvalidInput(format!("need at least 3 nodes, got {n}")));
        }
        let m = (n - 1) as f64;
        let nodes = match *kind {
            GridKind::Uniform => (0..n)
                .map(|i| {
                    // written so that x_{n-1-i} = -x_i exactly
                    let k = 2.0 * i as f64 - m;
                    ell * (k / m)
                })
                .collect(),
            GridKind::Stretched {
                center,
                width,
                amplification,
            } => {
                if !(width > 0.0 && amplification >= 1.0 && center.abs() < ell) {
                    return Err(Error::InvalidInput(format!(
                        "stretched grid needs width > 0, amplification >= 1 and |center| < ell \
                         (got {width}, {amplification}, {center})"
                    )));
                }
                let amp = amplification - 1.0;
                let t0 = ((-ell - center) / width).tanh();
                let cum = |x: f64| (x + ell) + amp * width * (((x - center) / width).tanh() - t0);
                let total = cum(ell);
                let mut nodes = vec![0.0; n];
                nodes[0] = -ell;
                nodes[n - 1] = ell;
                for (i, node) in nodes.iter_mut().enumerate().take(n - 1).skip(1) {
                    let target = total * i as f64 / m;
                    *node = bisect(|x| cum(x) - target, -ell, ell, 1e-15 * ell)?;
                }
                nodes
            }
        };
        let g = Grid1D {
            ell,
            nodes,
            kind: kind.clone(),
        };
        if g.nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("grid nodes are not strictly increasing".into()));
        }
        Ok(g)
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn kind(&self) -> &GridKind {
        &self.kind
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, GridKind::Uniform)
    }

    /// Spacing of a uniform grid.
    pub fn h(&self) -> Option<f64> {
        self.is_uniform().then(|| 2.0 * self.ell / (self.n() - 1) as f64)
    }

    pub fn widths(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn max_width(&self) -> f64 {
        self.widths().into_iter().fold(0.0, f64::max)
    }

    /// Largest cell width among cells intersecting `[x - r, x + r]`.
    pub fn max_width_near(&self, x: f64, r: f64) -> f64 {
        self.nodes
            .windows(2)
            .filter(|w| w[1] >= x - r && w[0] <= x + r)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Index `j` of the cell `[x_j, x_{j+1}]` containing `x` (clamped).
    pub fn cell_of(&self, x: f64) -> usize {
        let j = self.nodes.partition_point(|&xi| xi <= x);
        j.saturating_sub(1).min(self.n() - 2)
    }
}

// ---------------------------------------------------------------- diffusion

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

fn poly_prime(c: &[f64], x: f64) -> f64 {
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (k, &ci)| acc * x + k as f64 * ci)
}

/// Builtin catalog for `a(x)`. Polynomial coefficients are in ascending powers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DiffusionModel {
    Constant { value: f64 },
    /// `amplitude * exp(rate * x)`
    Exponential { amplitude: f64, rate: f64 },
    Polynomial { coefficients: Vec<f64> },
    Rational {
        numerator: Vec<f64>,
        denominator: Vec<f64>,
    },
}

impl DiffusionModel {
    pub fn a(&self, x: f64) -> f64 {
        match self {
            DiffusionModel::Constant { value } => *value,
            DiffusionModel::Exponential { amplitude, rate } => amplitude * (rate * x).exp(),
            DiffusionModel::Polynomial { coefficients } => poly(coefficients, x),
            DiffusionModel::Rational {
                numerator,
                denominator,
            } => poly(numerator, x) / poly(denominator, x),
        }
    }

    pub fn a_prime(&self, x: f64) -> f64 {
        match self {
            DiffusionModel::Constant { .. } => 0.0,
            DiffusionModel::Exponential { amplitude, rate } => amplitude * rate * (rate * x).exp(),
            DiffusionModel::Polynomial { coefficients } => poly_prime(coefficients, x),
            DiffusionModel::Rational {
                numerator,
                denominator,
            } => {
                let p = poly(numerator, x);
                let q = poly(denominator, x);
                (poly_prime(numerator, x) * q - p * poly_prime(denominator, x)) / (q * q)
            }
        }
    }
}

/// `a(x)` together with its bounds measured on the grid nodes.
#[derive(Clone, Debug)]
pub struct DiffusionCoefficient {
    pub model: DiffusionModel,
    pub alpha: f64,
    pub beta: f64,
    pub max_abs_prime: f64,
}

impl DiffusionCoefficient {
    pub fn on_grid(model: DiffusionModel, grid: &Grid1D) -> Self {
        let mut alpha = f64::INFINITY;
        let mut beta = f64::NEG_INFINITY;
        let mut dmax: f64 = 0.0;
        for &x in grid.nodes() {
            let a = model.a(x);
            alpha = alpha.min(a);
            beta = beta.max(a);
            dmax = dmax.max(model.a_prime(x).abs());
        }
        DiffusionCoefficient {
            model,
            alpha,
            beta,
            max_abs_prime: dmax,
        }
    }

    #[inline]
    pub fn a(&self, x: f64) -> f64 {
        self.model.a(x)
    }

    #[inline]
    pub fn a_prime(&self, x: f64) -> f64 {
        self.model.a_prime(x)
    }
}

// ---------------------------------------------------------------- nonlinearity

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FluxKind {
    /// `u_t = eps (a u_x)_x - f(u)_x`
    Conservation,
    /// `u_t = eps (a u_x)_x - g(u)`
    Reaction,
}

/// Builtin catalog for the nonlinearity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FluxModel {
    /// `f = u^2/2`
    Burgers,
    /// `f = a2 u^2 + a1 u + a0`
    Quadratic { a2: f64, a1: f64, a0: f64 },
    /// `f = (cosh(rate u) - 1)/rate^2`
    Cosh { rate: f64 },
    /// `f = (exp(rate u) - rate u - 1)/rate^2`
    ExpConvex { rate: f64 },
    /// `f = speed u`
    Linear { speed: f64 },
    /// `g = u^3 - u`
    AllenCahn,
    /// `g = scale (u - r0)(u - r1)(u - r2)`
    CubicReaction { roots: [f64; 3], scale: f64 },
}

impl FluxModel {
    pub fn kind(&self) -> FluxKind {
        match self {
            FluxModel::AllenCahn | FluxModel::CubicReaction { .. } => FluxKind::Reaction,
            _ => FluxKind::Conservation,
        }
    }

    /// `f` (conservation) or `g` (reaction).
    pub fn value(&self, u: f64) -> f64 {
        match *self {
            FluxModel::Burgers => 0.5 * u * u,
            FluxModel::Quadratic { a2, a1, a0 } => (a2 * u + a1) * u + a0,
            FluxModel::Cosh { rate } => 2.0 * (0.5 * rate * u).sinh().powi(2) / (rate * rate),
            FluxModel::ExpConvex { rate } => ((rate * u).exp_m1() - rate * u) / (rate * rate),
            FluxModel::Linear { speed } => speed * u,
            FluxModel::AllenCahn => u * u * u - u,
            FluxModel::CubicReaction { roots, scale } => {
                scale * (u - roots[0]) * (u - roots[1]) * (u - roots[2])
            }
        }
    }

    pub fn d1(&self, u: f64) -> f64 {
        match *self {
            FluxModel::Burgers => u,
            FluxModel::Quadratic { a2, a1, .. } => 2.0 * a2 * u + a1,
            FluxModel::Cosh { rate } => (rate * u).sinh() / rate,
            FluxModel::ExpConvex { rate } => (rate * u).exp_m1() / rate,
            FluxModel::Linear { speed } => speed,
            FluxModel::AllenCahn => 3.0 * u * u - 1.0,
            FluxModel::CubicReaction { roots: r, scale } => {
                scale * ((u - r[1]) * (u - r[2]) + (u - r[0]) * (u - r[2]) + (u - r[0]) * (u - r[1]))
            }
        }
    }

    /// `value(u) - value(u - t)` without cancellation for small `t`.
    pub fn increment(&self, u: f64, t: f64) -> f64 {
        match *self {
            FluxModel::Burgers => 0.5 * t * (2.0 * u - t),
            FluxModel::Quadratic { a2, a1, .. } => a2 * t * (2.0 * u - t) + a1 * t,
            FluxModel::Cosh { rate } => {
                2.0 * (0.5 * rate * (2.0 * u - t)).sinh() * (0.5 * rate * t).sinh() / (rate * rate)
            }
            FluxModel::ExpConvex { rate } => {
                (-(rate * u).exp() * (-rate * t).exp_m1() - rate * t) / (rate * rate)
            }
            FluxModel::Linear { speed } => speed * t,
            _ => self.value(u) - self.value(u - t),
        }
    }

    pub fn d2(&self, u: f64) -> f64 {
        match *self {
            FluxModel::Burgers => 1.0,
            FluxModel::Quadratic { a2, .. } => 2.0 * a2,
            FluxModel::Cosh { rate } => (rate * u).cosh(),
            FluxModel::ExpConvex { rate } => (rate * u).exp(),
            FluxModel::Linear { .. } => 0.0,
            FluxModel::AllenCahn => 6.0 * u,
            FluxModel::CubicReaction { roots: r, scale } => scale * (6.0 * u - 2.0 * (r[0] + r[1] + r[2])),
        }
    }
}

/// Nonlinearity with boundary states, critical value and the normalising
/// shift `f -> f - f(u*)` (conservation kind).
#[derive(Clone, Debug)]
pub struct FluxSpec {
    pub model: FluxModel,
    pub u_minus: f64,
    pub u_plus: f64,
    /// `f'(u*) = 0` (conservation) or middle zero of `g` (reaction).
    pub u_star: Option<f64>,
    /// Amount subtracted from `f`; zero for the reaction kind.
    pub shift: f64,
}

impl FluxSpec {
    pub fn new(model: FluxModel, u_minus: f64, u_plus: f64) -> Self {
        let (lo, hi) = (u_minus.min(u_plus), u_minus.max(u_plus));
        let u_star = match model.kind() {
            FluxKind::Conservation => {
                let d_lo = model.d1(lo);
                let d_hi = model.d1(hi);
                if d_lo < 0.0 && d_hi > 0.0 {
                    bisect(|u| model.d1(u), lo, hi, 1e-15 * (hi - lo)).ok()
                } else {
                    None
                }
            }
            FluxKind::Reaction => interior_zero(&model, lo, hi),
        };
        let shift = match (model.kind(), u_star) {
            (FluxKind::Conservation, Some(us)) => model.value(us),
            _ => 0.0,
        };
        FluxSpec {
            model,
            u_minus,
            u_plus,
            u_star,
            shift,
        }
    }

    pub fn kind(&self) -> FluxKind {
        self.model.kind()
    }

    /// `f(u) - shift` (conservation) or `g(u)` (reaction).
    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        self.model.value(u) - self.shift
    }

    /// `f(u) - f(u - t)`, accurate for small `t`.
    #[inline]
    pub fn increment(&self, u: f64, t: f64) -> f64 {
        self.model.increment(u, t)
    }

    #[inline]
    pub fn df(&self, u: f64) -> f64 {
        self.model.d1(u)
    }

    #[inline]
    pub fn d2f(&self, u: f64) -> f64 {
        self.model.d2(u)
    }

    /// `u*`, or an error naming the missing critical state.
    pub fn critical(&self) -> Result<f64> {
        self.u_star.ok_or_else(|| {
            Error::Hypothesis(format!(
                "no critical state strictly between u_plus = {} and u_minus = {}",
                self.u_plus, self.u_minus
            ))
        })
    }

    /// Largest of `|f'|` sampled on the state range `[u_plus, u_minus]`.
    pub fn max_abs_df(&self) -> f64 {
        let (lo, hi) = (self.u_plus.min(self.u_minus), self.u_plus.max(self.u_minus));
        (0..=200)
            .map(|k| self.df(lo + (hi - lo) * k as f64 / 200.0).abs())
            .fold(0.0, f64::max)
    }

    /// Root of `f(s) = level` on the side of `u*` containing `toward`.
    pub fn level_root(&self, level: f64, toward: f64) -> Result<f64> {
        let us = self.critical()?;
        let dir = (toward - us).signum();
        let mut far = toward;
        let mut step = (toward - us).abs().max(1.0);
        let mut n = 0;
        while self.f(far) < level {
            far += dir * step;
            step *= 2.0;
            n += 1;
            if n > 200 {
                return Err(Error::Convergence(format!("no root of f = {level} beyond {toward}")));
            }
        }
        let (a, b) = if dir > 0.0 { (us, far) } else { (far, us) };
        bisect(|s| self.f(s) - level, a, b, 1e-15 * (b - a).abs().max(1.0))
    }
}

fn interior_zero(model: &FluxModel, lo: f64, hi: f64) -> Option<f64> {
    let m = 4000;
    let mut found = Vec::new();
    let du = (hi - lo) / m as f64;
    // skip the end states themselves, they are zeros as well
    let margin = 1e-9 * (hi - lo);
    let mut prev_u = lo + margin;
    let mut prev = model.value(prev_u);
    for k in 1..=m {
        let u = if k == m { hi - margin } else { lo + du * k as f64 };
        let v = model.value(u);
        if v == 0.0 {
            found.push(u);
        } else if prev != 0.0 && v.signum() != prev.signum() {
            if let Ok(r) = bisect(|s| model.value(s), prev_u, u, 1e-15 * (hi - lo)) {
                found.push(r);
            }
        }
        prev_u = u;
        prev = v;
    }
    found.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    (found.len() == 1).then(|| found[0])
}

// ---------------------------------------------------------------- problem

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub epsilon: f64,
    pub grid: Grid1D,
    pub diffusion: DiffusionCoefficient,
    pub flux: FluxSpec,
    /// Admissible interface positions are `(-ell + band, ell - band)` with
    /// `band = band_fraction * ell`.
    pub band_fraction: f64,
    b_nodes: Vec<f64>,
}

impl ProblemSpec {
    pub fn new(epsilon: f64, grid: Grid1D, diffusion: DiffusionModel, flux: FluxSpec) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
        }
        let diffusion = DiffusionCoefficient::on_grid(diffusion, &grid);
        let x = grid.nodes();
        let mut b_nodes = vec![0.0; x.len()];
        for i in 0..x.len() - 1 {
            b_nodes[i + 1] = b_nodes[i] + simpson_inv_a(&diffusion.model, x[i], x[i + 1]);
        }
        Ok(ProblemSpec {
            epsilon,
            grid,
            diffusion,
            flux,
            band_fraction: 0.05,
            b_nodes,
        })
    }

    /// Burgers flux with `u_minus = 1`, `u_plus = -1` on a uniform grid.
    pub fn burgers(epsilon: f64, ell: f64, n: usize, diffusion: DiffusionModel) -> Result<Self> {
        Self::new(
            epsilon,
            Grid1D::uniform(ell, n)?,
            diffusion,
            FluxSpec::new(FluxModel::Burgers, 1.0, -1.0),
        )
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(ProblemSpec {
            epsilon,
            ..self.clone()
        })
    }

    pub fn ell(&self) -> f64 {
        self.grid.ell()
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    #[inline]
    pub fn a(&self, x: f64) -> f64 {
        self.diffusion.a(x)
    }

    /// Half-width of the excluded boundary band.
    pub fn band(&self) -> f64 {
        self.band_fraction * self.ell()
    }

    /// Interface positions must satisfy `|xi| < admissible_limit()`.
    pub fn admissible_limit(&self) -> f64 {
        self.ell() - self.band()
    }

    pub fn check_admissible(&self, xi: f64) -> Result<()> {
        let lim = self.admissible_limit();
        if xi.is_finite() && xi.abs() < lim {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "interface position {xi} outside the admissible band (-{lim}, {lim})"
            )))
        }
    }

    /// `b` at every grid node.
    pub fn b_nodes(&self) -> &[f64] {
        &self.b_nodes
    }

    pub fn b_total(&self) -> f64 {
        *self.b_nodes.last().unwrap()
    }

    /// `b(x) = int_{-ell}^{x} 1/a`, composite Simpson on the grid cells.
    pub fn b(&self, x: f64) -> Result<f64> {
        let ell = self.ell();
        if !(x >= -ell && x <= ell) {
            return Err(Error::Domain(format!("x = {x} outside [-{ell}, {ell}]")));
        }
        let j = self.grid.cell_of(x);
        let xj = self.nodes()[j];
        Ok(self.b_nodes[j] + simpson_inv_a(&self.diffusion.model, xj, x))
    }

    /// `x` with `b(x) = target`, for `target` in `[0, b(ell)]`.
    pub fn b_inverse(&self, target: f64) -> Result<f64> {
        let total = self.b_total();
        if !(0.0..=total).contains(&target) {
            return Err(Error::Domain(format!("b value {target} outside [0, {total}]")));
        }
        let j = self.b_nodes.partition_point(|&b| b <= target).saturating_sub(1).min(self.grid.n() - 2);
        let x = self.nodes();
        bisect(
            |s| self.b(s).unwrap_or(f64::NAN) - target,
            x[j],
            x[j + 1],
            1e-15 * self.ell(),
        )
    }
}

fn simpson_inv_a(model: &DiffusionModel, x0: f64, x1: f64) -> f64 {
    if x1 == x0 {
        return 0.0;
    }
    let xm = 0.5 * (x0 + x1);
    (x1 - x0) / 6.0 * (1.0 / model.a(x0) + 4.0 / model.a(xm) + 1.0 / model.a(x1))
}

/// The abscissa `x*` with `b(x*) = b(ell)/2`.
pub fn equilibrium_point(spec: &ProblemSpec) -> Result<f64> {
    let half = 0.5 * spec.b_total();
    let x = spec.nodes();
    let s: Vec<f64> = spec.b_nodes().iter().map(|b| b - half).collect();
    let mut changes = Vec::new();
    let mut last: Option<usize> = None;
    for (i, &v) in s.iter().enumerate() {
        if v == 0.0 || !v.is_finite() {
            continue;
        }
        if let Some(p) = last {
            if s[p].signum() != v.signum() {
                changes.push((p, i));
            }
        }
        last = Some(i);
    }
    if changes.len() != 1 {
        return Err(Error::NoUniqueSteadyState {
            sign_changes: changes.len(),
        });
    }
    let (p, q) = changes[0];
    if q > p + 1 {
        // zero exactly at the nodes between p and q
        return Ok(x[(p + q) / 2]);
    }
    let tol = 1e-10 * spec.b_total();
    let r = bisect(|t| spec.b(t).unwrap_or(f64::NAN) - half, x[p], x[q], 1e-15 * spec.ell())?;
    debug_assert!((spec.b(r)? - half).abs() <= tol);
    Ok(r)
}

// ---------------------------------------------------------------- hypotheses

#[derive(Clone, Debug, Serialize)]
pub struct HypothesisCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Positive when satisfied; magnitude says by how much.
    pub margin: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct HypothesisReport {
    pub kind: FluxKind,
    pub checks: Vec<HypothesisCheck>,
    pub flux_shift: f64,
    pub warnings: Vec<String>,
}

impl HypothesisReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn ensure(&self) -> Result<()> {
        let failed: Vec<String> = self
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{} ({})", c.name, c.detail))
            .collect();
        if failed.is_empty() {
            Ok(())
        } else {
            Err(Error::Hypothesis(failed.join("; ")))
        }
    }
}

fn check(name: &'static str, margin: f64, detail: String) -> HypothesisCheck {
    HypothesisCheck {
        name,
        passed: margin > 0.0 && margin.is_finite(),
        margin,
        detail,
    }
}

pub fn validate_hypotheses(spec: &ProblemSpec) -> HypothesisReport {
    let d = &spec.diffusion;
    let fl = &spec.flux;
    let (um, up) = (fl.u_minus, fl.u_plus);
    let mut checks = vec![
        check(
            "ellipticity",
            if d.beta.is_finite() { d.alpha } else { f64::NAN },
            format!("alpha = {:.6e}, beta = {:.6e} on the grid", d.alpha, d.beta),
        ),
        HypothesisCheck {
            name: "diffusion-derivative",
            passed: d.max_abs_prime.is_finite(),
            margin: if d.max_abs_prime.is_finite() { 1.0 } else { f64::NAN },
            detail: format!("max |a'| = {:.6e}", d.max_abs_prime),
        },
        check("boundary-order", um - up, format!("u_minus - u_plus = {:.6e}", um - up)),
    ];
    let samples: Vec<f64> = (0..=200).map(|k| up + (um - up) * k as f64 / 200.0).collect();
    match fl.kind() {
        FluxKind::Conservation => {
            let c0 = samples.iter().map(|&u| fl.d2f(u)).fold(f64::INFINITY, f64::min);
            checks.push(check("convexity", c0, format!("min f'' on the state range = {c0:.6e}")));
            let m = (-fl.df(up)).min(fl.df(um));
            checks.push(check(
                "characteristics",
                m,
                format!("f'(u_plus) = {:.6e}, f'(u_minus) = {:.6e}", fl.df(up), fl.df(um)),
            ));
            let gap = (fl.f(up) - fl.f(um)).abs();
            let tol = 1e-12 * fl.f(um).abs().max(1.0);
            checks.push(HypothesisCheck {
                name: "rankine-hugoniot",
                passed: gap <= tol,
                margin: tol - gap,
                detail: format!("|f(u_plus) - f(u_minus)| = {gap:.6e}"),
            });
        }
        FluxKind::Reaction => {
            let gm = fl.f(um).abs().max(fl.f(up).abs());
            checks.push(HypothesisCheck {
                name: "stable-states-are-zeros",
                passed: gm <= 1e-12,
                margin: 1e-12 - gm,
                detail: format!("max |g(u_pm)| = {gm:.6e}"),
            });
            let m = fl.df(up).min(fl.df(um));
            checks.push(check(
                "stable-states",
                m,
                format!("g'(u_plus) = {:.6e}, g'(u_minus) = {:.6e}", fl.df(up), fl.df(um)),
            ));
        }
    }
    let crit = match fl.u_star {
        Some(us) => {
            let m = (um - us).min(us - up);
            let extra = match fl.kind() {
                FluxKind::Reaction if fl.df(us) >= 0.0 => -fl.df(us).abs().max(1e-300),
                _ => m,
            };
            check("critical-state", m.min(extra), format!("u* = {us:.15e}"))
        }
        None => check("critical-state", f64::NAN, "no unique critical state in (u_plus, u_minus)".into()),
    };
    checks.push(crit);

    let mut warnings = Vec::new();
    let eps = spec.epsilon;
    let centre = equilibrium_point(spec).unwrap_or(0.0);
    let w = spec.grid.max_width_near(centre, 10.0 * eps);
    if w > eps / 10.0 {
        warnings.push(format!(
            "cell width {w:.3e} near the interface exceeds eps/10 = {:.3e}",
            eps / 10.0
        ));
    }
    if fl.shift != 0.0 {
        warnings.push(format!("flux shifted by f(u*) = {:.6e}", fl.shift));
    }
    HypothesisReport {
        kind: fl.kind(),
        checks,
        flux_shift: fl.shift,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn burgers(eps: f64, n: usize, a: DiffusionModel) -> ProblemSpec {
        ProblemSpec::burgers(eps, 1.0, n, a).unwrap()
    }

    #[test]
    fn uniform_grid_invariants() {
        let g = Grid1D::uniform(1.0, 2001).unwrap();
        let x = g.nodes();
        assert_eq!(x[0], -1.0);
        assert_eq!(x[2000], 1.0);
        assert_eq!(x[1000], 0.0);
        let h = g.h().unwrap();
        for w in x.windows(2) {
            assert!((w[1] - w[0] - h).abs() <= 1e-12 * h);
        }
    }

    #[test]
    fn stretched_grid_clusters() {
        let kind = GridKind::Stretched {
            center: 0.2,
            width: 0.1,
            amplification: 5.0,
        };
        let g = Grid1D::new(1.0, 401, &kind).unwrap();
        let x = g.nodes();
        assert_eq!(x[0], -1.0);
        assert_eq!(x[400], 1.0);
        assert!(g.max_width_near(0.2, 0.01) < 0.4 * g.max_width());
    }

    #[test]
    fn b_examples() {
        let s = burgers(0.1, 2001, DiffusionModel::Constant { value: 1.0 });
        assert!((s.b(0.5).unwrap() - 1.5).abs() < 1e-13);
        let s = burgers(0.1, 2001, DiffusionModel::Constant { value: 2.0 });
        assert!((s.b(1.0).unwrap() - 1.0).abs() < 1e-13);
        let s = burgers(0.1, 2001, DiffusionModel::Exponential { amplitude: 1.0, rate: 1.0 });
        let e = 1f64.exp();
        assert!((s.b(1.0).unwrap() - (e - 1.0 / e)).abs() < 1e-12);
        assert!(s.b(1.5).is_err());
    }

    #[test]
    fn b_simpson_order() {
        let a = DiffusionModel::Exponential { amplitude: 1.0, rate: 3.0 };
        let exact = ((3.0f64).exp() - (-3.0f64).exp()) / 3.0;
        let e1 = (burgers(0.1, 41, a.clone()).b_total() - exact).abs();
        let e2 = (burgers(0.1, 81, a).b_total() - exact).abs();
        let rate = (e1 / e2).log2();
        assert!((rate - 4.0).abs() < 0.2, "observed order {rate}");
    }

    #[test]
    fn equilibrium_examples() {
        let s = burgers(0.1, 2001, DiffusionModel::Constant { value: 1.0 });
        assert!(equilibrium_point(&s).unwrap().abs() < 1e-10);
        let s = burgers(0.1, 2001, DiffusionModel::Constant { value: 3.7 });
        assert!(equilibrium_point(&s).unwrap().abs() < 1e-10);
        let s = burgers(0.1, 2001, DiffusionModel::Exponential { amplitude: 1.0, rate: 1.0 });
        let xs = equilibrium_point(&s).unwrap();
        // closed form: e - exp(-x) = (e - 1/e)/2
        let e = 1f64.exp();
        let oracle = -(e - 0.5 * (e - 1.0 / e)).ln();
        assert!((xs - oracle).abs() < 1e-9);
        assert!((xs + 1f64.cosh().ln()).abs() < 1e-9);
    }

    #[test]
    fn equilibrium_rejects_multiple_crossings() {
        // 1/a = 1 - 12 x^2 makes b - b(ell)/2 = x - 4x^3 with three zeros
        let s = burgers(
            0.1,
            1001,
            DiffusionModel::Rational {
                numerator: vec![1.0],
                denominator: vec![1.0, 0.0, -12.0],
            },
        );
        match equilibrium_point(&s) {
            Err(Error::NoUniqueSteadyState { sign_changes }) => assert_eq!(sign_changes, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn hypotheses_examples() {
        let s = burgers(0.1, 2001, DiffusionModel::Constant { value: 1.0 });
        let r = validate_hypotheses(&s);
        assert!(r.all_passed(), "{r:?}");

        let s = ProblemSpec::new(
            0.1,
            Grid1D::uniform(1.0, 201).unwrap(),
            DiffusionModel::Constant { value: 1.0 },
            FluxSpec::new(FluxModel::Burgers, 1.0, 0.5),
        )
        .unwrap();
        let r = validate_hypotheses(&s);
        assert!(!r.check("rankine-hugoniot").unwrap().passed);

        let s = burgers(0.1, 201, DiffusionModel::Polynomial { coefficients: vec![0.0, 1.0] });
        let r = validate_hypotheses(&s);
        assert!(!r.check("ellipticity").unwrap().passed);
        assert!(r.ensure().is_err());
    }

    #[test]
    fn flux_shift_applied() {
        let f = FluxSpec::new(FluxModel::Quadratic { a2: 0.5, a1: 0.0, a0: 2.0 }, 1.0, -1.0);
        assert_eq!(f.u_star, Some(0.0));
        assert!((f.shift - 2.0).abs() < 1e-15);
        assert!(f.f(0.0).abs() < 1e-15);
        let f = FluxSpec::new(FluxModel::AllenCahn, 1.0, -1.0);
        assert!(f.u_star.unwrap().abs() < 1e-12);
        assert_eq!(f.shift, 0.0);
    }

    #[test]
    fn increments_match_differences() {
        let models = [
            FluxModel::Burgers,
            FluxModel::Quadratic { a2: 0.7, a1: -0.2, a0: 1.0 },
            FluxModel::Cosh { rate: 1.3 },
            FluxModel::ExpConvex { rate: 0.8 },
            FluxModel::Linear { speed: 2.0 },
        ];
        for m in models {
            for &(u, t) in &[(1.0, 0.3), (-0.7, -0.4), (0.9, 1e-3)] {
                let d = m.value(u) - m.value(u - t);
                assert!((m.increment(u, t) - d).abs() < 1e-13, "{m:?}");
            }
            // tiny increments keep relative accuracy
            let t = 1e-20;
            let rel = (m.increment(1.0, t) - m.d1(1.0) * t).abs() / (m.d1(1.0) * t).abs();
            assert!(rel < 1e-12, "{m:?} {rel}");
        }
    }

    #[test]
    fn level_root_burgers() {
        let f = FluxSpec::new(FluxModel::Burgers, 1.0, -1.0);
        let r = f.level_root(0.5 * 1.21, 1.0).unwrap();
        assert!((r - 1.1).abs() < 1e-14);
        let r = f.level_root(0.5 * 1.21, -1.0).unwrap();
        assert!((r + 1.1).abs() < 1e-14);
    }
}
