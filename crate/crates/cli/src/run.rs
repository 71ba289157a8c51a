//! Experiment dispatch. Each ε-point is computed in parallel; files and the
//! one-line summaries are emitted afterwards in ε order.


use rayon::prelude::*;
use serde_json::{json, Value};
use statrs::distribution::{ContinuousCDF, StudentsT};

use mfront_core::io::fmt_f64;
use mfront_core::numerics::fit::{linear_fit, LinearFit};
use mfront_core::pde::{member_plus_bump, run_experiment, smoothed_step, IntegratorConfig, RunResult};
use mfront_core::problem::ProblemSpec;
use mfront_core::reduced::{admissible_grid, build_speed_map, ReducedOptions, ThetaMode};
use mfront_core::spectral::{spectral_report_at, SpectralThresholds};
use mfront_core::steady::{build_approx_member, build_exact_steady, omega_residual};
use mfront_core::studies::{eigen_scaling, pde_vs_reduced, residual_map, slow_motion, write_residual_csv, PdeVsReduced};

use crate::config::{Comparison, Experiment, ExperimentConfig, InitialCondition, SweepTarget};
use crate::output::Output;
use crate::CliError;

/// Summary of a finished (or aborted) command.
pub struct Report {
    pub points: Vec<Value>,
    pub extra: Value,
    pub error: Option<CliError>,
}

fn tag(e: f64) -> String {
    format!("eps{e}")
}

fn say(line: String) {
    println!("{line}");
}

/// Slope with a two-sided 95% Student-t interval.
fn fit_json(fit: &LinearFit) -> Value {
    let ci = if fit.n >= 3 && fit.slope_stderr.is_finite() {
        let t = StudentsT::new(0.0, 1.0, (fit.n - 2) as f64)
            .map(|d| d.inverse_cdf(0.975))
            .unwrap_or(f64::NAN);
        json!([fit.slope - t * fit.slope_stderr, fit.slope + t * fit.slope_stderr])
    } else {
        Value::Null
    };
    json!({
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "slope_stderr": fit.slope_stderr,
        "slope_ci95": ci,
        "points": fit.n,
    })
}

/// Run `f` for every ε in parallel, then hand the results to `emit` in order.
/// Stops emitting at the first failure and reports it.
fn per_epsilon<T, F, G>(specs: &[ProblemSpec], f: F, mut emit: G) -> Report
where
    T: Send,
    F: Fn(&ProblemSpec) -> mfront_core::Result<T> + Sync,
    G: FnMut(&ProblemSpec, T) -> Result<Value, CliError>,
{
    let results: Vec<mfront_core::Result<T>> = specs.par_iter().map(&f).collect();
    let mut points = Vec::new();
    let mut error = None;
    for (s, r) in specs.iter().zip(results) {
        match r.map_err(CliError::from).and_then(|v| emit(s, v)) {
            Ok(p) => points.push(p),
            Err(e) => {
                say(format!("eps={} FAILED: {e}", s.epsilon));
                error = Some(e);
                break;
            }
        }
    }
    Report {
        points,
        extra: Value::Null,
        error,
    }
}

pub fn execute(cfg: &ExperimentConfig, out: &mut Output) -> Report {
    let prepared = cfg.problem.base_spec().and_then(|base| {
        let eps = cfg.problem.epsilons()?;
        let specs = eps
            .iter()
            .map(|&e| base.with_epsilon(e))
            .collect::<mfront_core::Result<Vec<_>>>()?;
        Ok((base, specs))
    });
    let (base, specs) = match prepared {
        Ok(v) => v,
        Err(e) => {
            return Report {
                points: Vec::new(),
                extra: Value::Null,
                error: Some(e),
            }
        }
    };
    match &cfg.experiment {
        Experiment::Steady { xi, .. } => steady(&specs, *xi, out),
        Experiment::Spectrum { xi, k, .. } => spectrum(&specs, *xi, *k, out),
        Experiment::Speedmap { points, mode, .. } => speedmap(&specs, *points, *mode, out),
        Experiment::SlowMotion {
            xi0, mode, rel_tol, ..
        } => slow(&base, &specs, *xi0, *mode, *rel_tol, out),
        Experiment::Simulate {
            initial,
            integrator,
            compare,
            ..
        } => simulate(&specs, initial, integrator, compare.as_ref(), out),
        Experiment::Sweep { target, .. } => sweep(&base, &specs, target, out),
    }
}

fn steady(specs: &[ProblemSpec], xi: Option<f64>, out: &mut Output) -> Report {
    match xi {
        None => per_epsilon(specs, build_exact_steady, |s, ex| {
            out.write(&format!("steady_{}.csv", tag(s.epsilon)), |w| ex.write_csv(w, s))?;
            say(format!(
                "eps={} kappa={:.10e} k={:.10e} x*={:.6} crossing={:.6}",
                s.epsilon, ex.constant.kappa, ex.constant.k, ex.x_star, ex.crossing
            ));
            Ok(json!({
                "epsilon": s.epsilon,
                "kappa": ex.constant.kappa,
                "k": ex.constant.k,
                "delta": ex.constant.delta,
                "x_star": ex.x_star,
                "crossing": ex.crossing,
                "boundary_residual": ex.boundary_residual,
            }))
        }),
        Some(xi) => per_epsilon(
            specs,
            |s| build_approx_member(s, xi),
            |s, m| {
                out.write(&format!("member_{}.csv", tag(s.epsilon)), |w| m.write_csv(w, s))?;
                let om = omega_residual(&m, s);
                say(format!(
                    "eps={} xi={xi} jump={:.6e} log10(Omega)={:.4}",
                    s.epsilon,
                    m.jump,
                    om.log10_abs()
                ));
                Ok(json!({
                    "epsilon": s.epsilon,
                    "xi": xi,
                    "k_minus": m.k_minus,
                    "k_plus": m.k_plus,
                    "jump": m.jump,
                    "omega_sign": om.sign,
                    "log10_omega": om.log10_abs(),
                    "kappa_minus": m.kappa_minus,
                    "kappa_plus": m.kappa_plus,
                }))
            },
        ),
    }
}

fn spectrum(specs: &[ProblemSpec], xi: f64, k: usize, out: &mut Output) -> Report {
    per_epsilon(
        specs,
        |s| spectral_report_at(s, xi, k, SpectralThresholds::default()),
        |s, (r, rep)| {
            let t = tag(s.epsilon);
            out.write(&format!("spectrum_{t}.csv"), |w| r.write_spectrum_csv(w))?;
            out.write(&format!("eigenfunctions_{t}.csv"), |w| r.write_eigenfunctions_csv(w, s.nodes()))?;
            let l2 = r.eigenvalues.get(1).map_or("n/a".to_string(), |v| format!("{v:.6e}"));
            say(format!(
                "eps={} lambda1={:.6e} lambda2={l2} hypotheses={}",
                s.epsilon,
                r.eigenvalues[0],
                if rep.all_passed() { "ok" } else { "violated" }
            ));
            Ok(json!({
                "epsilon": s.epsilon,
                "xi": xi,
                "eigenvalues": r.eigenvalues,
                "residuals": r.residuals,
                "rayleigh": r.rayleigh,
                "hypotheses": rep,
            }))
        },
    )
}

fn speedmap(specs: &[ProblemSpec], points: usize, mode: ThetaMode, out: &mut Output) -> Report {
    if points < 2 {
        return invalid("speedmap needs at least two points");
    }
    per_epsilon(
        specs,
        |s| build_speed_map(s, &admissible_grid(s, points), mode),
        |s, m| {
            out.write(&format!("speedmap_{}.csv", tag(s.epsilon)), |w| m.write_csv(w))?;
            let bad = m.dissipativity_violations();
            say(format!(
                "eps={} xi*={:.6} beta={:.6e} dissipativity violations={}",
                s.epsilon,
                m.xi_star,
                -m.theta_prime_at_star,
                bad.len()
            ));
            Ok(json!({
                "epsilon": s.epsilon,
                "xi_star": m.xi_star,
                "beta": -m.theta_prime_at_star,
                "violations": bad,
            }))
        },
    )
}

fn invalid(msg: &str) -> Report {
    Report {
        points: Vec::new(),
        extra: Value::Null,
        error: Some(CliError::Validation(msg.into())),
    }
}

fn slow(base: &ProblemSpec, specs: &[ProblemSpec], xi0: f64, mode: ThetaMode, rel_tol: f64, out: &mut Output) -> Report {
    let opts = ReducedOptions {
        mode,
        rel_tol,
        ..Default::default()
    };
    let eps: Vec<f64> = specs.iter().map(|s| s.epsilon).collect();
    let sm = match slow_motion(base, &eps, xi0, &opts) {
        Ok(v) => v,
        Err(e) => {
            say(format!("slow-motion FAILED: {e}"));
            return Report {
                points: Vec::new(),
                extra: Value::Null,
                error: Some(e.into()),
            };
        }
    };
    let mut points = Vec::new();
    let mut write = || -> Result<(), CliError> {
        out.write("slow_motion.csv", |w| sm.write_csv(w))?;
        for (r, tr) in sm.rows.iter().zip(&sm.trajectories) {
            out.write(&format!("trajectory_{}.csv", tag(r.epsilon)), |w| tr.write_csv(w))?;
            say(format!(
                "eps={} beta={:.6e} t_half={:.6e} envelope=[{:.4}, {:.4}]",
                r.epsilon, r.beta, r.t_half, r.envelope_min, r.envelope_max
            ));
            points.push(serde_json::to_value(r).unwrap_or(Value::Null));
        }
        Ok(())
    };
    let error = write().err();
    let extra = match &sm.fit {
        Some(f) => {
            say(format!(
                "fit ln t_half = c/eps + b: c={:.6} R^2={:.6}",
                f.slope, f.r_squared
            ));
            json!({ "xi0": xi0, "t_half_fit": fit_json(f) })
        }
        None => json!({ "xi0": xi0 }),
    };
    Report { points, extra, error }
}

fn initial_state(s: &ProblemSpec, ic: &InitialCondition) -> mfront_core::Result<Vec<f64>> {
    match ic {
        InitialCondition::Member { xi } => Ok(build_approx_member(s, *xi)?.profile),
        InitialCondition::MemberPlusBump {
            xi,
            amplitude,
            center,
            width,
        } => member_plus_bump(s, *xi, *amplitude, *center, *width),
        InitialCondition::Step { x0, width } => Ok(smoothed_step(s, *x0, *width)),
    }
}

enum SimOutcome {
    Plain(RunResult),
    Compared(Box<PdeVsReduced>),
}

fn simulate(
    specs: &[ProblemSpec],
    ic: &InitialCondition,
    cfg: &IntegratorConfig,
    compare: Option<&Comparison>,
    out: &mut Output,
) -> Report {
    let xi0 = match (ic, compare) {
        (InitialCondition::Member { xi }, Some(_)) => Some(*xi),
        (_, Some(_)) => return invalid("comparison with the reduced model needs a `member` initial condition"),
        _ => None,
    };
    per_epsilon(
        specs,
        |s| match (xi0, compare) {
            (Some(xi0), Some(c)) => {
                pde_vs_reduced(s, xi0, c.transient, cfg, &ReducedOptions::default()).map(|r| SimOutcome::Compared(Box::new(r)))
            }
            _ => run_experiment(s, &initial_state(s, ic)?, cfg).map(SimOutcome::Plain),
        },
        |s, o| {
            let t = tag(s.epsilon);
            let (run, cmp) = match o {
                SimOutcome::Plain(r) => (r, None),
                SimOutcome::Compared(c) => (c.run.clone(), Some(c)),
            };
            out.write(&format!("trajectory_{t}.csv"), |w| run.write_trajectory_csv(w))?;
            for (i, sn) in run.snapshots.iter().enumerate() {
                out.write(&format!("snapshot_{t}_{i:04}.csv"), |w| sn.write_csv(w, s.nodes()))?;
            }
            let last = run.snapshots.last();
            let mut v = json!({
                "epsilon": s.epsilon,
                "dt": run.dt,
                "steps": run.steps,
                "max_mass_defect": run.max_mass_defect,
                "final_t": last.map(|x| x.t),
                "final_xi_hat": last.and_then(|x| x.xi_hat),
                "snapshot_times": run.snapshots.iter().map(|x| x.t).collect::<Vec<_>>(),
            });
            let mut line = format!(
                "eps={} steps={} dt={:.4e} final xi_hat={}",
                s.epsilon,
                run.steps,
                run.dt,
                last.and_then(|x| x.xi_hat).map_or("n/a".into(), |x| format!("{x:.6}"))
            );
            if let Some(c) = cmp {
                out.write(&format!("comparison_{t}.csv"), |w| c.write_csv(w))?;
                line.push_str(&format!(
                    " max|xi_pde - xi_reduced|={:.4e} (tolerance {:.4e})",
                    c.max_discrepancy, c.tolerance
                ));
                v["max_discrepancy"] = json!(c.max_discrepancy);
                v["tolerance"] = json!(c.tolerance);
                v["degraded_extractions"] = json!(c.degraded_extractions);
            }
            say(line);
            Ok(v)
        },
    )
}

fn sweep(base: &ProblemSpec, specs: &[ProblemSpec], target: &SweepTarget, out: &mut Output) -> Report {
    let eps: Vec<f64> = specs.iter().map(|s| s.epsilon).collect();
    match target {
        SweepTarget::Spectrum { xi, k } => {
            let sc = match eigen_scaling(base, &eps, *xi, *k) {
                Ok(v) => v,
                Err(e) => return failed("sweep", e.into()),
            };
            let mut points = Vec::new();
            let mut write = || -> Result<(), CliError> {
                out.write("eigen_scaling.csv", |w| {
                    writeln!(w, "epsilon,lambda1,lambda2,gap")?;
                    for r in &sc.rows {
                        writeln!(
                            w,
                            "{},{},{},{}",
                            fmt_f64(r.epsilon),
                            fmt_f64(r.lambda1),
                            fmt_f64(r.lambda2),
                            fmt_f64(r.gap)
                        )?;
                    }
                    Ok(())
                })?;
                for (r, sp) in sc.rows.iter().zip(&sc.spectra) {
                    out.write(&format!("spectrum_{}.csv", tag(r.epsilon)), |w| sp.write_spectrum_csv(w))?;
                    say(format!(
                        "eps={} lambda1={:.6e} lambda2={:.6e} gap={:.6e}",
                        r.epsilon, r.lambda1, r.lambda2, r.gap
                    ));
                    points.push(serde_json::to_value(r).unwrap_or(Value::Null));
                }
                if let Some(f) = &sc.fit {
                    out.write("fit.json", |w| {
                        serde_json::to_writer_pretty(&mut *w, &fit_json(f))?;
                        writeln!(w)
                    })?;
                    say(format!("fit ln|lambda1| vs 1/eps: slope={:.6} R^2={:.6}", f.slope, f.r_squared));
                }
                Ok(())
            };
            let error = write().err();
            let extra = json!({ "xi": xi, "lambda1_fit": sc.fit.as_ref().map(fit_json) });
            Report { points, extra, error }
        }
        SweepTarget::Residual { xi } => {
            let xis = match xi.values() {
                Ok(v) => v,
                Err(e) => return failed("sweep", e),
            };
            let rows = match residual_map(base, &eps, &xis) {
                Ok(v) => v,
                Err(e) => return failed("sweep", e.into()),
            };
            let mut points = Vec::new();
            let mut fits = Vec::new();
            let mut write = || -> Result<(), CliError> {
                out.write("residual_map.csv", |w| write_residual_csv(w, &rows))?;
                for e in &eps {
                    let here: Vec<_> = rows.iter().filter(|r| r.epsilon == *e).collect();
                    let worst = here.iter().map(|r| r.omega.log10_abs()).fold(f64::NEG_INFINITY, f64::max);
                    say(format!("eps={e} max log10(Omega)={worst:.4} over {} points", here.len()));
                    points.push(json!({ "epsilon": e, "max_log10_omega": worst }));
                }
                if eps.len() >= 2 {
                    for x in &xis {
                        let here: Vec<_> = rows.iter().filter(|r| r.xi == *x && !r.omega.is_zero()).collect();
                        let a: Vec<f64> = here.iter().map(|r| 1.0 / r.epsilon).collect();
                        let b: Vec<f64> = here.iter().map(|r| r.omega.ln_abs).collect();
                        if let Ok(f) = linear_fit(&a, &b) {
                            fits.push(json!({ "xi": x, "ln_omega_fit": fit_json(&f) }));
                        }
                    }
                }
                Ok(())
            };
            let error = write().err();
            Report {
                points,
                extra: json!({ "fits": fits }),
                error,
            }
        }
    }
}

fn failed(what: &str, e: CliError) -> Report {
    say(format!("{what} FAILED: {e}"));
    Report {
        points: Vec::new(),
        extra: Value::Null,
        error: Some(e),
    }
}
