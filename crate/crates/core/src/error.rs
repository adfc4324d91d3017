use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("degenerate environment: {0}")]
    DegenerateEnvironment(String),

    #[error("quadrature did not converge: achieved error estimate {achieved:.3e}, requested {requested:.3e}")]
    Accuracy { achieved: f64, requested: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("ambiguous eigenvalue cluster at {lambda}: borderline gaps {gaps:?}")]
    AmbiguousCluster { lambda: String, gaps: Vec<f64> },

    #[error("step size underflow at t = {time:e} (stiff or divergent generator)")]
    Stiffness { time: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("generator is not block decomposable: {0}")]
    NotBlockDecomposable(String),

    #[error("bracketing failed: {0}")]
    Bracketing(String),

    #[error("cluster tracking lost: {0}")]
    Tracking(String),

    #[error("not in regime: {0}")]
    NotInRegime(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("empty data: {0}")]
    EmptyData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Parameter { .. } | Error::DegenerateEnvironment(_) => 2,
            Error::Io(_) => 4,
            _ => 3,
        }
    }
}
