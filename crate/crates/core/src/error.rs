use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("bisection failed to meet tolerance in [{lo:e}, {hi:e}] (residual {residual:e})")]
    BisectionFailed { lo: f64, hi: f64, residual: f64 },

    #[error("quadrature did not converge: estimate {estimate:e}, error estimate {error:e}")]
    QuadratureFailed { estimate: f64, error: f64 },

    #[error("{op} is not supported for the {model} input model")]
    Unsupported { op: &'static str, model: &'static str },

    #[error("non-convex instance: {0}")]
    NonConvex(String),

    #[error("rho = {rho} lies beyond the tabulated range (max {max}, clamp limit {limit})")]
    Extrapolation { rho: f64, max: f64, limit: f64 },

    #[error("reduction target not reached with budget up to {cap:e}")]
    TargetUnreachable { cap: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
