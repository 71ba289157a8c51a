mod common;

use mfront_core::io::fmt_f64;
use mfront_core::numerics::fit::linear_fit;
use mfront_core::numerics::tridiag::Thomas;
use mfront_core::pde::{extract_interface, member_plus_bump, run_experiment, Cadence, IntegratorConfig};
use mfront_core::problem::{DiffusionModel, ProblemSpec};
use mfront_core::reduced::{theta, ThetaMode};
use mfront_core::spectral::{eigenvalues, sturm_count};
use mfront_core::steady::{build_approx_member, omega_residual};
use mfront_core::SignedLog;
use proptest::prelude::*;

use common::{dense_tridiagonal, jacobi_eigenvalues};

fn tridiagonal(max: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..=max).prop_flat_map(|n| {
        (
            prop::collection::vec(-5.0..5.0f64, n),
            prop::collection::vec(-5.0..5.0f64, n - 1),
        )
    })
}

fn burgers(eps: f64, n: usize) -> ProblemSpec {
    ProblemSpec::burgers(eps, 1.0, n, DiffusionModel::Constant { value: 1.0 }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sturm_count_is_monotone((d, e) in tridiagonal(40), a in -20.0..20.0f64, b in -20.0..20.0f64) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(sturm_count(&d, &e, lo) <= sturm_count(&d, &e, hi));
        prop_assert!(sturm_count(&d, &e, hi) <= d.len());
    }

    #[test]
    fn eigenvalues_keep_trace_and_match_dense((d, e) in tridiagonal(30)) {
        let ev = eigenvalues(&d, &e);
        let scale = d.iter().chain(&e).fold(1.0f64, |m, x| m.max(x.abs()));
        prop_assert!((ev.iter().sum::<f64>() - d.iter().sum::<f64>()).abs() <= 1e-12 * scale * d.len() as f64);
        prop_assert!(ev.windows(2).all(|w| w[0] <= w[1]));
        let dense = jacobi_eigenvalues(dense_tridiagonal(&d, &e));
        for (a, b) in ev.iter().zip(&dense) {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn csv_numbers_round_trip(x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
        prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn line_fit_recovers_exact_lines(slope in -10.0..10.0f64, icpt in -10.0..10.0f64, n in 3usize..20) {
        let x: Vec<f64> = (0..n).map(|i| i as f64 * 0.7 - 2.0).collect();
        let y: Vec<f64> = x.iter().map(|v| slope * v + icpt).collect();
        let f = linear_fit(&x, &y).unwrap();
        prop_assert!((f.slope - slope).abs() < 1e-10);
        prop_assert!((f.intercept - icpt).abs() < 1e-10);
        if slope.abs() > 1e-6 {
            prop_assert!((f.r_squared - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn signed_log_arithmetic_matches_floats(a in -1e3..1e3f64, b in -1e3..1e3f64) {
        let (sa, sb) = (SignedLog::from_f64(a), SignedLog::from_f64(b));
        let tol = 1e-12 * (a.abs() + b.abs()).max(1e-300);
        prop_assert!((sa.add(sb).value() - (a + b)).abs() <= tol * 4.0);
        prop_assert!((sa.sub(sb).value() - (a - b)).abs() <= tol * 4.0);
        prop_assert!((sa.mul(sb).value() - a * b).abs() <= 1e-12 * (a * b).abs());
    }

    #[test]
    fn thomas_solves_dominant_systems(n in 2usize..60, seed in 0u64..1000) {
        let v = |i: usize, k: u64| (((i as u64 + 1) * 2654435761 + k * 40503 + seed * 97) % 1000) as f64 / 500.0 - 1.0;
        let sub: Vec<f64> = (0..n).map(|i| v(i, 1)).collect();
        let sup: Vec<f64> = (0..n).map(|i| v(i, 2)).collect();
        let diag: Vec<f64> = (0..n).map(|i| 2.5 + v(i, 3)).collect();
        let x: Vec<f64> = (0..n).map(|i| v(i, 4)).collect();
        let mut rhs: Vec<f64> = (0..n)
            .map(|i| {
                diag[i] * x[i]
                    + if i > 0 { sub[i] * x[i - 1] } else { 0.0 }
                    + if i + 1 < n { sup[i] * x[i + 1] } else { 0.0 }
            })
            .collect();
        Thomas::new(&sub, &diag, &sup).solve(&mut rhs);
        for (a, b) in rhs.iter().zip(&x) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn b_is_increasing_and_invertible(rate in -1.5..1.5f64, q in 0.0..1.0f64) {
        let s = ProblemSpec::burgers(0.1, 1.0, 201, DiffusionModel::Exponential { amplitude: 1.0, rate }).unwrap();
        prop_assert!(s.b_nodes().windows(2).all(|w| w[1] > w[0]));
        let target = q * s.b_total();
        let x = s.b_inverse(target).unwrap();
        prop_assert!((s.b(x).unwrap() - target).abs() < 1e-12 * s.b_total().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn members_are_monotone_with_exact_boundary_values(xi in -0.9..0.9f64, eps in 0.06..0.15f64) {
        let s = burgers(eps, 401);
        let m = build_approx_member(&s, xi).unwrap();
        prop_assert_eq!(m.profile[0], 1.0);
        prop_assert_eq!(*m.profile.last().unwrap(), -1.0);
        prop_assert!(m.profile.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn burgers_residual_and_speed_are_odd(xi in 0.05..0.9f64) {
        let s = burgers(0.1, 401);
        let (ma, mb) = (build_approx_member(&s, xi).unwrap(), build_approx_member(&s, -xi).unwrap());
        let (ra, rb) = (ma.residual_mass_signed(&s), mb.residual_mass_signed(&s));
        prop_assert!((ra + rb).abs() <= 1e-12 * ra.abs());
        prop_assert!(ra < 0.0);
        let (a, b) = (omega_residual(&ma, &s), omega_residual(&mb, &s));
        prop_assert!((a.ln_abs - b.ln_abs).abs() < 1e-9);
        let ta = theta(&s, xi, ThetaMode::Accurate).unwrap();
        let tb = theta(&s, -xi, ThetaMode::Accurate).unwrap();
        // dissipative: the interface moves back towards xi* = 0
        prop_assert_eq!(ta.sign, -1);
        prop_assert_eq!(tb.sign, 1);
        prop_assert!((ta.ln_abs - tb.ln_abs).abs() < 1e-4);
    }

    #[test]
    fn extraction_recovers_member_position(xi in -0.85..0.85f64) {
        let s = burgers(0.1, 401);
        let m = build_approx_member(&s, xi).unwrap();
        let e = extract_interface(&s, &m.profile).unwrap();
        prop_assert!(!e.degraded);
        prop_assert!((e.xi_hat - xi).abs() < 1e-8);
    }

    #[test]
    fn pde_conserves_mass_up_to_boundary_flux(amp in -0.2..0.2f64, c in -0.5..0.5f64) {
        let s = burgers(0.1, 201);
        let u0 = member_plus_bump(&s, 0.1, amp, c, 0.1).unwrap();
        let cfg = IntegratorConfig {
            t_end: 0.5,
            snapshots: Cadence::Every { interval: 0.25 },
            extract: false,
            ..Default::default()
        };
        let r = run_experiment(&s, &u0, &cfg).unwrap();
        prop_assert!(r.max_mass_defect < 1e-10, "{}", r.max_mass_defect);
    }

    #[test]
    fn cadence_times_are_sorted_and_end_at_t_end(t_first in 1e-3..1.0f64, count in 1usize..50, t_end in 1.0..500.0f64) {
        let t = Cadence::Log { t_first, count }.times(t_end);
        prop_assert!(t.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(t[0] > 0.0);
        prop_assert_eq!(*t.last().unwrap(), t_end);
    }
}
