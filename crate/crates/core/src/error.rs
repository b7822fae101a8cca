use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data violates a structural invariant (e.g. a non-unitary coin).
    #[error("validation error at `{path}`: {message}")]
    Validation { path: String, message: String },

    #[error("lattice window would grow to {requested} sites (limit {limit})")]
    WindowLimit { requested: usize, limit: usize },

    #[error("aliasing: {mass:.3e} of the state's mass lies within the transform margin (threshold {threshold:.1e})")]
    Aliasing { mass: f64, threshold: f64 },

    #[error("unsupported coin case: {0}")]
    Unsupported(String),

    #[error("singular point: {0}")]
    Singularity(String),

    #[error("total mass of the limit distribution is {total:.6}, off by more than {tolerance:.1e}")]
    MassDefect { total: f64, tolerance: f64 },

    #[error("{what} did not converge by n = {n_max} (last increment {last_increment:.3e})")]
    NonConvergence {
        what: String,
        n_max: u64,
        last_increment: f64,
    },

    #[error("pure-point estimators disagree: norm deficit {deficit:.4}, time average {time_average:.4} (gate {gate:.1e})")]
    Inconsistency {
        deficit: f64,
        time_average: f64,
        gate: f64,
    },

    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Prefix the field path of validation and parse errors.
    pub fn at(self, prefix: &str) -> Self {
        let join = |p: String| {
            if p.is_empty() {
                prefix.to_string()
            } else {
                format!("{prefix}.{p}")
            }
        };
        match self {
            Error::Validation { path, message } => Error::Validation {
                path: join(path),
                message,
            },
            Error::Parse { path, message } => Error::Parse {
                path: join(path),
                message,
            },
            other => other,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
