use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("no unique steady state: b(x) - b(ell)/2 has {sign_changes} sign changes")]
    NoUniqueSteadyState { sign_changes: usize },

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("accuracy: {what} (residual {residual:.3e} > tolerance {tolerance:.3e}); refine the grid")]
    Accuracy {
        what: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("transform consistency: eigenpair {k} has residual {residual:.3e} > {tolerance:.3e}")]
    TransformConsistency {
        k: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("transversality: <psi_1, dU/dxi> = {0:.3e}")]
    Transversality(f64),

    #[error("monotonicity: {0}")]
    Monotonicity(String),

    #[error("interface extraction: {0}")]
    Extraction(String),

    #[error("step restriction: dt = {dt:.3e} exceeds {limit:.3e}")]
    Cfl { dt: f64, limit: f64 },

    #[error("blow-up at t = {t:.6e} (last valid state at t = {last_t:.6e})")]
    BlowUp {
        t: f64,
        last_t: f64,
        last_u: Vec<f64>,
    },
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Convergence(_)
                | Error::Accuracy { .. }
                | Error::TransformConsistency { .. }
                | Error::Transversality(_)
                | Error::Extraction(_)
                | Error::BlowUp { .. }
        )
    }
}
