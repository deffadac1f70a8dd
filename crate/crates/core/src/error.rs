use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh needs at least one cell per axis")]
    EmptyMesh,

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("jacobian is singular")]
    SingularJacobian,

    #[error("newton did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("line search stalled at newton iteration {iteration} (residual {residual:e})")]
    LineSearchStalled { iteration: usize, residual: f64 },

    #[error("time step {step} failed: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("data is not mean-free (lumped mean {mean:e})")]
    MeanNotZero { mean: f64 },

    #[error("boundary value {value} at node {node} lies outside the range of the transmission")]
    InverseOutOfRange { node: usize, value: f64 },

    #[error("field series is empty")]
    EmptySeries,

    #[error("runs do not share a grid: {0}")]
    GridMismatch(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn mismatch(what: &'static str, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            what,
            expected,
            found,
        }
    }

    pub(crate) fn config(line: usize, message: impl Into<String>) -> Self {
        Error::Config {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Step index for errors raised while advancing a time step.
    pub fn step_index(&self) -> Option<usize> {
        match self {
            Error::Step { step, .. } => Some(*step),
            _ => None,
        }
    }

    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::SingularJacobian
            | Error::NoConvergence { .. }
            | Error::LineSearchStalled { .. } => true,
            Error::Step { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }
}

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::mismatch(what, expected, found))
    }
}
