use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error in {function}: {detail}")]
    Domain { function: &'static str, detail: String },

    #[error("{what} is singular on the light cone")]
    ConeSingularity { what: &'static str },

    #[error("tabulated potential needs at least 4 samples, got {0}")]
    TooFewSamples(usize),

    #[error("tabulated potential abscissae must be strictly increasing (sample {0})")]
    UnorderedSamples(usize),

    #[error("quadrature did not converge: achieved {achieved:.3e}, requested {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("failed to read potential table: {0}")]
    Table(String),
}

impl Error {
    pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            function,
            detail: detail.into(),
        }
    }
}
