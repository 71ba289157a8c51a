//! Reference values computed independently in 40-digit arithmetic from the
//! tanh branches `-kappa tanh(kappa (x - x0) / (2 eps))` of the Burgers problem.

use mfront_core::problem::{DiffusionModel, ProblemSpec};
use mfront_core::steady::{build_approx_member, build_exact_steady, equilibrium_interface, omega_residual};

fn burgers(eps: f64) -> ProblemSpec {
    ProblemSpec::burgers(eps, 1.0, 2001, DiffusionModel::Constant { value: 1.0 }).unwrap()
}

#[test]
fn exact_steady_kappa() {
    for (eps, kappa) in [(0.1, 1.000_090_721_636_781_973_3), (0.05, 1.000_000_004_122_306_913_5)] {
        let ex = build_exact_steady(&burgers(eps)).unwrap();
        assert!((ex.constant.kappa - kappa).abs() < 1e-10, "eps {eps}: {}", ex.constant.kappa);
    }
}

#[test]
fn branch_offsets_and_residual_mass() {
    // (eps, xi, k_minus - 1/2, k_plus - 1/2, Omega)
    let table = [
        (0.1, 0.2, 1.228_676_399_390_735e-5, 6.677_972_477_919_338e-4, 6.555_104_837_980_265e-4),
        (0.1, -0.5, 1.280_658_738_786_262e-2, 6.117_994_008_036_601e-7, 1.280_597_558_846_182e-2),
        (0.06, 0.2, 4.122_306_922_002_231e-9, 3.239_064_186_621_086e-6, 3.234_941_879_699_083e-6),
        (0.06, -0.5, 4.790_534_273_080_034e-4, 2.777_588_771_141_204e-11, 4.790_533_995_321_157e-4),
    ];
    for (eps, xi, dm, dp, om) in table {
        let s = burgers(eps);
        let m = build_approx_member(&s, xi).unwrap();
        assert!(((m.delta_minus - dm) / dm).abs() < 1e-6, "eps {eps} xi {xi}: {}", m.delta_minus);
        assert!(((m.delta_plus - dp) / dp).abs() < 1e-6, "eps {eps} xi {xi}: {}", m.delta_plus);
        let o = omega_residual(&m, &s).value();
        assert!(((o - om) / om).abs() < 1e-6, "eps {eps} xi {xi}: {o}");
        // jump of U' across xi is (k_minus - k_plus) / eps
        assert!(((m.jump - (dm - dp) / eps) / m.jump).abs() < 1e-6);
    }
}

#[test]
fn equilibrium_for_exponential_diffusion() {
    // b(x) = e - e^{-x}, half-mass point at -ln cosh 1
    let s = ProblemSpec::burgers(0.1, 1.0, 2001, DiffusionModel::Exponential { amplitude: 1.0, rate: 1.0 }).unwrap();
    let xs = equilibrium_interface(&s).unwrap();
    assert!((xs + 0.433_780_830_483_027_2).abs() < 1e-10, "{xs}");
}
