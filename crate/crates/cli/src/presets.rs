//! Canned reproduction experiments.

use clap::ValueEnum;

use mfront_core::pde::{Cadence, IntegratorConfig};
use mfront_core::reduced::ThetaMode;

use crate::config::{Comparison, Experiment, ExperimentConfig, InitialCondition, ProblemConfig, Span, SweepTarget, Values};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// lambda_1, lambda_2 over eps in {0.06, ..., 0.12} at xi = 0.2.
    EigenScaling,
    /// Omega over xi in [-0.9, 0.9] for the same eps values.
    ResidualMap,
    /// Reduced halving time from xi0 = 0.3, eps in {0.07, ..., 0.10}.
    SlowMotion,
    /// Full problem against the reduced model, eps = 0.1, n = 1001, t <= 2000.
    PdeVsReduced,
}

fn span(start: f64, stop: f64, step: f64) -> Values {
    Values::Span(Span { start, stop, step })
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::EigenScaling => "eigen-scaling",
            Preset::ResidualMap => "residual-map",
            Preset::SlowMotion => "slow-motion",
            Preset::PdeVsReduced => "pde-vs-reduced",
        }
    }

    pub fn config(&self) -> ExperimentConfig {
        match self {
            Preset::EigenScaling => ExperimentConfig {
                problem: ProblemConfig::burgers(span(0.06, 0.12, 0.01), 2001),
                experiment: Experiment::Sweep {
                    target: SweepTarget::Spectrum { xi: 0.2, k: 4 },
                    output: None,
                },
            },
            Preset::ResidualMap => ExperimentConfig {
                problem: ProblemConfig::burgers(span(0.06, 0.12, 0.01), 2001),
                experiment: Experiment::Sweep {
                    target: SweepTarget::Residual {
                        xi: span(-0.9, 0.9, 0.05),
                    },
                    output: None,
                },
            },
            Preset::SlowMotion => ExperimentConfig {
                problem: ProblemConfig::burgers(span(0.07, 0.1, 0.01), 2001),
                experiment: Experiment::SlowMotion {
                    xi0: 0.3,
                    mode: ThetaMode::Accurate,
                    rel_tol: 1e-8,
                    output: None,
                },
            },
            Preset::PdeVsReduced => ExperimentConfig {
                problem: ProblemConfig::burgers(Values::One(0.1), 1001),
                experiment: Experiment::Simulate {
                    initial: InitialCondition::Member { xi: 0.3 },
                    integrator: IntegratorConfig {
                        t_end: 2000.0,
                        snapshots: Cadence::Log {
                            t_first: 10.0,
                            count: 40,
                        },
                        spectral_k: 1,
                        ..Default::default()
                    },
                    compare: Some(Comparison { transient: 10.0 }),
                    output: None,
                },
            },
        }
    }
}
