//! Declarative experiment configuration (JSON, strict schema).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use mfront_core::pde::IntegratorConfig;
use mfront_core::problem::{validate_hypotheses, DiffusionModel, FluxModel, FluxSpec, Grid1D, GridKind, ProblemSpec};
use mfront_core::reduced::ThetaMode;
use mfront_core::studies::range;

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub experiment: Experiment,
}

/// `{start, stop, step}`, both ends included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Span {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

/// A number, a list or a span.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Values {
    One(f64),
    List(Vec<f64>),
    Span(Span),
}

impl Values {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        let v = match self {
            Values::One(x) => vec![*x],
            Values::List(v) => v.clone(),
            Values::Span(s) => {
                if !(s.step > 0.0 && s.stop >= s.start) {
                    return Err(CliError::Validation(format!(
                        "span needs step > 0 and stop >= start, got {s:?}"
                    )));
                }
                range(s.start, s.stop, s.step)
            }
        };
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
            return Err(CliError::Validation("value list must be non-empty and finite".into()));
        }
        Ok(v)
    }
}

fn one() -> f64 {
    1.0
}

fn minus_one() -> f64 {
    -1.0
}

fn unit_diffusion() -> DiffusionModel {
    DiffusionModel::Constant { value: 1.0 }
}

fn burgers() -> FluxModel {
    FluxModel::Burgers
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub epsilon: Values,
    #[serde(default = "one")]
    pub ell: f64,
    pub n: usize,
    #[serde(default)]
    pub grid: GridKind,
    #[serde(default = "unit_diffusion")]
    pub diffusion: DiffusionModel,
    #[serde(default = "burgers")]
    pub flux: FluxModel,
    #[serde(default = "one")]
    pub u_minus: f64,
    #[serde(default = "minus_one")]
    pub u_plus: f64,
}

impl ProblemConfig {
    pub fn burgers(epsilon: Values, n: usize) -> Self {
        ProblemConfig {
            epsilon,
            ell: 1.0,
            n,
            grid: GridKind::Uniform,
            diffusion: unit_diffusion(),
            flux: FluxModel::Burgers,
            u_minus: 1.0,
            u_plus: -1.0,
        }
    }

    pub fn epsilons(&self) -> Result<Vec<f64>, CliError> {
        let e = self.epsilon.values()?;
        if let Some(bad) = e.iter().find(|x| **x <= 0.0) {
            return Err(CliError::Validation(format!("epsilon must be positive, got {bad}")));
        }
        Ok(e)
    }

    /// Problem at the first epsilon; the others come from `with_epsilon`.
    pub fn base_spec(&self) -> Result<ProblemSpec, CliError> {
        let eps = self.epsilons()?;
        let grid = Grid1D::new(self.ell, self.n, &self.grid)?;
        let flux = FluxSpec::new(self.flux.clone(), self.u_minus, self.u_plus);
        let spec = ProblemSpec::new(eps[0], grid, self.diffusion.clone(), flux)?;
        let report = validate_hypotheses(&spec);
        for w in &report.warnings {
            log::warn!("{w}");
        }
        report.ensure()?;
        Ok(spec)
    }
}

fn default_k() -> usize {
    4
}

fn default_points() -> usize {
    41
}

fn default_rel_tol() -> f64 {
    1e-8
}

fn default_transient() -> f64 {
    10.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialCondition {
    Member { xi: f64 },
    /// Member plus `amplitude exp(-((x - center)/width)^2)`.
    MemberPlusBump {
        xi: f64,
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// Boundary states joined by a tanh of the given width at `x0`.
    Step { x0: f64, width: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SweepTarget {
    /// Leading eigenvalues at a fixed interface position.
    Spectrum {
        xi: f64,
        #[serde(default = "default_k")]
        k: usize,
    },
    /// Residual mass over a grid of interface positions.
    Residual { xi: Values },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Comparison {
    /// Compare only snapshots at or after this time.
    #[serde(default = "default_transient")]
    pub transient: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    /// Exact steady state, or the family member at `xi` when given.
    Steady {
        #[serde(default)]
        xi: Option<f64>,
        #[serde(default)]
        output: Option<PathBuf>,
    },
    Spectrum {
        xi: f64,
        #[serde(default = "default_k")]
        k: usize,
        #[serde(default)]
        output: Option<PathBuf>,
    },
    Speedmap {
        #[serde(default = "default_points")]
        points: usize,
        #[serde(default)]
        mode: ThetaMode,
        #[serde(default)]
        output: Option<PathBuf>,
    },
    SlowMotion {
        xi0: f64,
        #[serde(default)]
        mode: ThetaMode,
        #[serde(default = "default_rel_tol")]
        rel_tol: f64,
        #[serde(default)]
        output: Option<PathBuf>,
    },
    Simulate {
        initial: InitialCondition,
        #[serde(default)]
        integrator: IntegratorConfig,
        /// Compare with the reduced trajectory; needs a `member` start.
        #[serde(default)]
        compare: Option<Comparison>,
        #[serde(default)]
        output: Option<PathBuf>,
    },
    Sweep {
        target: SweepTarget,
        #[serde(default)]
        output: Option<PathBuf>,
    },
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Steady { .. } => "steady",
            Experiment::Spectrum { .. } => "spectrum",
            Experiment::Speedmap { .. } => "speedmap",
            Experiment::SlowMotion { .. } => "slow-motion",
            Experiment::Simulate { .. } => "simulate",
            Experiment::Sweep { .. } => "sweep",
        }
    }

    pub fn output(&self) -> Option<&Path> {
        match self {
            Experiment::Steady { output, .. }
            | Experiment::Spectrum { output, .. }
            | Experiment::Speedmap { output, .. }
            | Experiment::SlowMotion { output, .. }
            | Experiment::Simulate { output, .. }
            | Experiment::Sweep { output, .. } => output.as_deref(),
        }
    }
}

/// Parse with the failing field path in the error message.
pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Validation(format!("config error at `{path}`: {}", e.inner()))
    })
}

pub fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text)
}

/// Problem block alone, used to override a preset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemOverride {
    pub problem: ProblemConfig,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let c: ExperimentConfig = parse(
            r#"{"problem": {"epsilon": 0.1, "n": 101}, "experiment": {"kind": "spectrum", "xi": 0.2}}"#,
        )
        .unwrap();
        assert_eq!(c.problem.flux, FluxModel::Burgers);
        assert_eq!(c.problem.u_plus, -1.0);
        assert_eq!(
            c.experiment,
            Experiment::Spectrum {
                xi: 0.2,
                k: 4,
                output: None
            }
        );
    }

    #[test]
    fn epsilon_forms() {
        assert_eq!(Values::One(0.1).values().unwrap(), vec![0.1]);
        let s: Values = serde_json::from_str(r#"{"start": 0.06, "stop": 0.08, "step": 0.01}"#).unwrap();
        assert_eq!(s.values().unwrap(), vec![0.06, 0.07, 0.08]);
        assert!(Values::List(vec![]).values().is_err());
        let bad: Result<Values, _> = serde_json::from_str(r#"{"start": 0.06, "stop": 0.08, "stepp": 0.01}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn type_error_names_the_field() {
        let e = parse::<ExperimentConfig>(
            r#"{"problem": {"epsilon": 0.1, "n": "many"}, "experiment": {"kind": "steady"}}"#,
        )
        .unwrap_err();
        assert!(e.to_string().contains("problem.n"), "{e}");
    }

    #[test]
    fn unknown_keys_rejected() {
        for text in [
            r#"{"problem": {"epsilon": 0.1, "n": 11, "eta": 1}, "experiment": {"kind": "steady"}}"#,
            r#"{"problem": {"epsilon": 0.1, "n": 11}, "experiment": {"kind": "steady", "xii": 0}}"#,
            r#"{"problem": {"epsilon": 0.1, "n": 11}, "experiment": {"kind": "steady"}, "x": 1}"#,
        ] {
            assert!(parse::<ExperimentConfig>(text).is_err(), "{text}");
        }
    }

    #[test]
    fn every_kind_round_trips() {
        let mut problem = ProblemConfig::burgers(Values::List(vec![0.07, 0.1]), 401);
        problem.diffusion = DiffusionModel::Exponential {
            amplitude: 1.0,
            rate: 1.0,
        };
        problem.grid = GridKind::Stretched {
            center: 0.0,
            width: 0.2,
            amplification: 3.0,
        };
        let experiments = vec![
            Experiment::Steady {
                xi: Some(0.1),
                output: Some("out".into()),
            },
            Experiment::Spectrum {
                xi: 0.2,
                k: 3,
                output: None,
            },
            Experiment::Speedmap {
                points: 11,
                mode: ThetaMode::Fast,
                output: None,
            },
            Experiment::SlowMotion {
                xi0: 0.3,
                mode: ThetaMode::Accurate,
                rel_tol: 1e-6,
                output: None,
            },
            Experiment::Simulate {
                initial: InitialCondition::MemberPlusBump {
                    xi: 0.25,
                    amplitude: 0.05,
                    center: -0.3,
                    width: 0.1,
                },
                integrator: IntegratorConfig {
                    dt: Some(1e-3),
                    ..Default::default()
                },
                compare: Some(Comparison { transient: 5.0 }),
                output: None,
            },
            Experiment::Sweep {
                target: SweepTarget::Residual {
                    xi: Values::Span(Span {
                        start: -0.5,
                        stop: 0.5,
                        step: 0.25,
                    }),
                },
                output: None,
            },
        ];
        for experiment in experiments {
            let c = ExperimentConfig {
                problem: problem.clone(),
                experiment,
            };
            let text = serde_json::to_string(&c).unwrap();
            let back: ExperimentConfig = parse(&text).unwrap();
            assert_eq!(back, c);
            assert_eq!(serde_json::to_string(&back).unwrap(), text);
        }
    }
}
