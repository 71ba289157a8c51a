//! Parameter sweeps shared by the command-line presets and the acceptance
//! suite. Every row type writes a CSV; fits summarise the scaling laws.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::io::fmt_f64;
use crate::numerics::fit::{linear_fit, LinearFit};
use crate::pde::{member_plus_bump, run_experiment, Cadence, IntegratorConfig, RunResult, Scheme};
use crate::problem::ProblemSpec;
use crate::reduced::{
    admissible_grid, decay_rate, integrate_interface, theta, InterfaceTrajectory, ReducedOptions, Stop, ThetaMode,
};
use crate::spectral::{spectrum_at, SpectrumResult};
use crate::steady::{build_approx_member, equilibrium_interface, omega_residual};
use crate::{Result, SignedLog};

/// `{start, start + step, ..., stop}` with rounding to 12 digits.
pub fn range(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let m = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=m)
        .map(|i| {
            let v = start + step * i as f64;
            (v * 1e12).round() / 1e12
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenRow {
    pub epsilon: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub gap: f64,
    pub max_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenScaling {
    pub xi: f64,
    pub rows: Vec<EigenRow>,
    /// `ln|lambda_1|` against `1/eps`, with two or more points.
    pub fit: Option<LinearFit>,
    #[serde(skip)]
    pub spectra: Vec<SpectrumResult>,
}

impl EigenScaling {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "epsilon,lambda1,lambda2,gap,max_residual")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                fmt_f64(r.epsilon),
                fmt_f64(r.lambda1),
                fmt_f64(r.lambda2),
                fmt_f64(r.gap),
                fmt_f64(r.max_residual)
            )?;
        }
        Ok(())
    }
}

pub fn eigen_scaling(base: &ProblemSpec, eps: &[f64], xi: f64, k: usize) -> Result<EigenScaling> {
    let spectra: Vec<SpectrumResult> = eps
        .par_iter()
        .map(|&e| Ok(spectrum_at(&base.with_epsilon(e)?, xi, k.max(2))?.1))
        .collect::<Result<_>>()?;
    let rows: Vec<EigenRow> = spectra
        .iter()
        .map(|r| EigenRow {
            epsilon: r.epsilon,
            lambda1: r.eigenvalues[0],
            lambda2: r.eigenvalues[1],
            gap: r.eigenvalues[0] - r.eigenvalues[1],
            max_residual: r.residuals.iter().cloned().fold(0.0, f64::max),
        })
        .collect();
    let x: Vec<f64> = rows.iter().map(|r| 1.0 / r.epsilon).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.lambda1.abs().ln()).collect();
    Ok(EigenScaling {
        xi,
        fit: if rows.len() >= 2 { Some(linear_fit(&x, &y)?) } else { None },
        rows,
        spectra,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct OmegaRow {
    pub epsilon: f64,
    pub xi: f64,
    pub omega: SignedLog,
}

pub fn residual_map(base: &ProblemSpec, eps: &[f64], xis: &[f64]) -> Result<Vec<OmegaRow>> {
    let jobs: Vec<(f64, f64)> = eps.iter().flat_map(|&e| xis.iter().map(move |&x| (e, x))).collect();
    jobs.par_iter()
        .map(|&(e, xi)| {
            let s = base.with_epsilon(e)?;
            let m = build_approx_member(&s, xi)?;
            Ok(OmegaRow {
                epsilon: e,
                xi,
                omega: omega_residual(&m, &s),
            })
        })
        .collect()
}

pub fn write_residual_csv<W: Write>(mut w: W, rows: &[OmegaRow]) -> io::Result<()> {
    writeln!(w, "epsilon,xi,log10_omega")?;
    for r in rows {
        writeln!(w, "{},{},{}", fmt_f64(r.epsilon), fmt_f64(r.xi), fmt_f64(r.omega.log10_abs()))?;
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct SlowRow {
    pub epsilon: f64,
    pub beta: f64,
    pub t_half: f64,
    /// Range of `|xi - xi*| / (|xi0 - xi*| e^{-beta t})` once the distance
    /// is below a tenth of the initial one.
    pub envelope_min: f64,
    pub envelope_max: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SlowMotion {
    pub xi0: f64,
    pub mode: ThetaMode,
    pub rows: Vec<SlowRow>,
    /// `ln t_half` against `1/eps`, with two or more points.
    pub fit: Option<LinearFit>,
    #[serde(skip)]
    pub trajectories: Vec<InterfaceTrajectory>,
}

impl SlowMotion {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "epsilon,beta,t_half,envelope_min,envelope_max")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                fmt_f64(r.epsilon),
                fmt_f64(r.beta),
                fmt_f64(r.t_half),
                fmt_f64(r.envelope_min),
                fmt_f64(r.envelope_max)
            )?;
        }
        Ok(())
    }
}

pub fn slow_motion(base: &ProblemSpec, eps: &[f64], xi0: f64, opts: &ReducedOptions) -> Result<SlowMotion> {
    let out: Vec<(SlowRow, InterfaceTrajectory)> = eps
        .par_iter()
        .map(|&e| {
            let s = base.with_epsilon(e)?;
            let xs = equilibrium_interface(&s)?;
            let beta = decay_rate(&s, opts.mode)?;
            let tr = integrate_interface(&s, xi0, Stop::Time(f64::INFINITY), opts)?;
            let t_half = tr
                .time_to_fraction(0.5)
                .ok_or_else(|| crate::Error::Convergence("trajectory never halved its distance".into()))?;
            let d0 = (xi0 - xs).abs();
            let ratios: Vec<f64> = tr
                .times
                .iter()
                .zip(&tr.xi)
                .filter(|(_, x)| (**x - xs).abs() <= 0.1 * d0)
                .map(|(t, x)| (x - xs).abs() / (d0 * (-beta * t).exp()))
                .collect();
            let (lo, hi) = ratios
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(*r), b.max(*r)));
            let row = SlowRow {
                epsilon: e,
                beta,
                t_half,
                envelope_min: lo,
                envelope_max: hi,
            };
            Ok((row, tr))
        })
        .collect::<Result<_>>()?;
    let (rows, trajectories): (Vec<SlowRow>, Vec<InterfaceTrajectory>) = out.into_iter().unzip();
    let x: Vec<f64> = rows.iter().map(|r| 1.0 / r.epsilon).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.t_half.ln()).collect();
    Ok(SlowMotion {
        xi0,
        mode: opts.mode,
        fit: if rows.len() >= 2 { Some(linear_fit(&x, &y)?) } else { None },
        rows,
        trajectories,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DissipativityRow {
    pub xi: f64,
    pub theta: SignedLog,
    pub dissipative: bool,
}

/// `(xi - xi*) theta(xi) < 0` on `count` admissible points.
pub fn dissipativity(spec: &ProblemSpec, count: usize, mode: ThetaMode) -> Result<(f64, Vec<DissipativityRow>)> {
    let xs = equilibrium_interface(spec)?;
    let grid = admissible_grid(spec, count);
    let rows = grid
        .par_iter()
        .map(|&xi| {
            let t = theta(spec, xi, mode)?;
            let d = xi - xs;
            let ok = if d.abs() <= 1e-12 * spec.ell() {
                true
            } else {
                d.signum() * (t.sign as f64) < 0.0
            };
            Ok(DissipativityRow {
                xi,
                theta: t,
                dissipative: ok,
            })
        })
        .collect::<Result<_>>()?;
    Ok((xs, rows))
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonRow {
    pub t: f64,
    pub xi_pde: f64,
    pub xi_reduced: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PdeVsReduced {
    pub epsilon: f64,
    pub xi0: f64,
    pub n: usize,
    pub rows: Vec<ComparisonRow>,
    /// Largest discrepancy over the compared window.
    pub max_discrepancy: f64,
    pub tolerance: f64,
    pub degraded_extractions: usize,
    #[serde(skip)]
    pub run: RunResult,
}

impl PdeVsReduced {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,xi_pde,xi_reduced,abs_diff")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{}",
                fmt_f64(r.t),
                fmt_f64(r.xi_pde),
                fmt_f64(r.xi_reduced),
                fmt_f64((r.xi_pde - r.xi_reduced).abs())
            )?;
        }
        Ok(())
    }
}

/// Snapshot settings for [`pde_vs_reduced`]: `count` log-spaced times on
/// `[t_first, t_end]`.
pub fn comparison_config(t_first: f64, t_end: f64, count: usize, scheme: Scheme) -> IntegratorConfig {
    IntegratorConfig {
        t_end,
        scheme,
        snapshots: Cadence::Log { t_first, count },
        spectral_k: 1,
        ..Default::default()
    }
}

/// Run the PDE from the member at `xi0` and compare the extracted interface
/// with the reduced trajectory at the snapshots with `t >= transient`,
/// stopping the comparison once `|xi - xi*| <= 5h`.
pub fn pde_vs_reduced(
    spec: &ProblemSpec,
    xi0: f64,
    transient: f64,
    cfg: &IntegratorConfig,
    opts: &ReducedOptions,
) -> Result<PdeVsReduced> {
    let xs = equilibrium_interface(spec)?;
    let h = spec.grid.max_width();
    let u0 = build_approx_member(spec, xi0)?.profile;
    let (run, red) = rayon::join(
        || run_experiment(spec, &u0, cfg),
        || integrate_interface(spec, xi0, Stop::Time(cfg.t_end), opts),
    );
    let (run, red) = (run?, red?);
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    let mut degraded = 0;
    for s in &run.snapshots {
        let Some(xp) = s.xi_hat else { continue };
        if s.t < transient * (1.0 - 1e-12) {
            continue;
        }
        degraded += s.degraded as usize;
        let xr = red.xi_at(s.t);
        rows.push(ComparisonRow {
            t: s.t,
            xi_pde: xp,
            xi_reduced: xr,
        });
        if (xr - xs).abs() > 5.0 * h {
            worst = worst.max((xp - xr).abs());
        }
    }
    Ok(PdeVsReduced {
        epsilon: spec.epsilon,
        xi0,
        n: spec.grid.n(),
        rows,
        max_discrepancy: worst,
        tolerance: (5.0 * h).max(0.05 * (xi0 - xs).abs()),
        degraded_extractions: degraded,
        run,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayRow {
    pub t: f64,
    pub xi_hat: f64,
    pub v_l2: f64,
    pub v_linf: f64,
    pub dv_l2: f64,
    pub v1: f64,
    pub coupling: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PerturbationDecay {
    pub rows: Vec<DecayRow>,
    /// `||v||_{L2}` never increases between samples with `t >= t_transient`.
    pub nonincreasing: bool,
    pub post_transient_max: f64,
    pub final_l2: f64,
    pub t_transient: f64,
}

impl PerturbationDecay {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,xi_hat,v_L2,v_Linf,dv_L2,v1,coupling")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                fmt_f64(r.t),
                fmt_f64(r.xi_hat),
                fmt_f64(r.v_l2),
                fmt_f64(r.v_linf),
                fmt_f64(r.dv_l2),
                fmt_f64(r.v1),
                fmt_f64(r.coupling)
            )?;
        }
        Ok(())
    }
}

/// Start from the member at `xi0` plus a Gaussian bump and follow `||v||`.
pub fn perturbation_decay(
    spec: &ProblemSpec,
    xi0: f64,
    bump: (f64, f64, f64),
    t_transient: f64,
    t_end: f64,
    count: usize,
    scheme: Scheme,
) -> Result<PerturbationDecay> {
    let u0 = member_plus_bump(spec, xi0, bump.0, bump.1, bump.2)?;
    let cfg = IntegratorConfig {
        t_end,
        scheme,
        snapshots: Cadence::Log { t_first: 1.0, count },
        spectral_k: 4,
        ..Default::default()
    };
    let run = run_experiment(spec, &u0, &cfg)?;
    let rows: Vec<DecayRow> = run
        .snapshots
        .iter()
        .filter_map(|s| {
            let d = s.diagnostics.as_ref()?;
            Some(DecayRow {
                t: s.t,
                xi_hat: s.xi_hat?,
                v_l2: d.v_l2,
                v_linf: d.v_linf,
                dv_l2: d.dv_l2,
                v1: d.coefficients[0],
                coupling: d.coupling,
            })
        })
        .collect();
    let late: Vec<f64> = rows.iter().filter(|r| r.t >= t_transient).map(|r| r.v_l2).collect();
    let nonincreasing = late.windows(2).all(|w| w[1] <= w[0]);
    let post_transient_max = late.iter().cloned().fold(0.0, f64::max);
    let final_l2 = late.last().copied().unwrap_or(f64::NAN);
    Ok(PerturbationDecay {
        rows,
        nonincreasing,
        post_transient_max,
        final_l2,
        t_transient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(range(0.06, 0.12, 0.01), vec![0.06, 0.07, 0.08, 0.09, 0.1, 0.11, 0.12]);
        assert_eq!(range(1.0, 1.0, 0.5), vec![1.0]);
    }
}
