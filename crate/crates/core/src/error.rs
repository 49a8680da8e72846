use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("graph is disconnected: {count} components (representatives {representatives:?}, sizes {sizes:?})")]
    GraphDisconnected {
        count: usize,
        representatives: Vec<usize>,
        sizes: Vec<usize>,
    },

    #[error("graph has {n} vertices, over the dense eigensolver cap of {cap}; use the solver-based path")]
    TooLarge { n: usize, cap: usize },

    #[error("operator is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("degenerate signal: {0}")]
    DegenerateSignal(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// The iteration budget ran out; `best` is the last iterate.
    #[error("no convergence after {iterations} iterations (relative residual {relative_residual:e})")]
    NotConverged {
        iterations: usize,
        relative_residual: f64,
        best: Vec<f64>,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for failures caused by the numbers rather than the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite(_)
                | Error::SingularSystem(_)
                | Error::NumericalFailure(_)
                | Error::NotConverged { .. }
        )
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
