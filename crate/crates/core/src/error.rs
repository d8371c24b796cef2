use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("graph is disconnected or Laplacian rank deficient: {0}")]
    RankDeficient(String),

    #[error("numerical blow-up at t = {time}: non-finite state")]
    NumericalBlowup { time: f64 },

    #[error("invalid bracket: {0}")]
    Bracket(String),

    #[error("root finder failed: {0}")]
    Solver(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("condition violated: {0}")]
    ConditionViolated(String),

    #[error("no equilibrium found after {iterations} iterations (residual {residual:.3e})")]
    NoEquilibrium { iterations: usize, residual: f64 },

    #[error("too many failed trials: {failed} of {total}")]
    TooManyFailures { failed: usize, total: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("toml: {0}")]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NumericalBlowup { .. }
                | Error::Solver(_)
                | Error::NoEquilibrium { .. }
                | Error::TooManyFailures { .. }
        )
    }
}
