use thiserror::Error;

/// Errors raised by the solver, the certificate machinery and the harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("radius {r} outside the domain [0, {r_max}]")]
    Domain { r: f64, r_max: f64 },

    #[error("coefficient evaluated at the pole; use the symmetric pole stencil")]
    Pole,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("positivity violated: {0}")]
    Positivity(String),

    #[error("Newton iteration did not converge after {iterations} iterations (last residual {residual:e})")]
    Solver {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("scalar ODE blows up near t = {blowup_estimate}")]
    Divergence { blowup_estimate: f64 },

    #[error("metric scale vanishes at t = {time} (s = {scale})")]
    FlowExtinction { time: f64, scale: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors that mean "the scenario is outside the theorem's
    /// hypothesis class or badly configured", as opposed to a numerical failure.
    pub fn is_hypothesis_or_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Hypothesis(_) | Error::Domain { .. } | Error::Pole
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
