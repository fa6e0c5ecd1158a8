use thiserror::Error;

/// Errors produced by the numerical routines and the harness around them.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("{op} did not converge after {terms} terms")]
    NonConvergence { op: &'static str, terms: usize },

    #[error("truncation budget exceeded in {op}: {detail}")]
    Budget { op: &'static str, detail: String },

    #[error("quadrature failed: estimated error {error:e} above tolerance {tol:e}")]
    Quadrature { error: f64, tol: f64 },

    #[error("Feller condition violated: 2*kappa*theta = {lhs} < sigma^2 = {rhs}")]
    Feller { lhs: f64, rhs: f64 },

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("invalid configuration for `{key}`: {detail}")]
    Config { key: String, detail: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain { op, detail: detail.into() }
    }

    pub(crate) fn budget(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Budget { op, detail: detail.into() }
    }

    pub(crate) fn config(key: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Config { key: key.into(), detail: detail.into() }
    }

    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::Budget { .. } | Error::Quadrature { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
