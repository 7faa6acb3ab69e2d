use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Parameter outside the documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Mathematically undefined request (pole, divergent integral at the point).
    #[error("domain error: {0}")]
    Domain(String),

    /// Result not representable in double precision.
    #[error("range error: {0}")]
    Range(String),

    #[error("zero {index} of {kind} did not converge")]
    ZeroNotConverged { kind: &'static str, index: usize },

    #[error("profile has {0} zeros counted with multiplicity; at least 2 are required")]
    UnsupportedDegree(usize),

    #[error("zero multiplicity {0} is not supported by the partial-fraction method")]
    UnsupportedMultiplicity(usize),

    #[error("quadrature did not reach tolerance: value {value:e}, error estimate {estimate:e}")]
    Quadrature { value: f64, estimate: f64 },

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("truncation tail {tail:e} not certified with {available} stored zeros")]
    NeedMoreZeros { available: usize, tail: f64 },

    #[error("ill-conditioned: {0}")]
    IllConditioned(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

impl Error {
    /// True for errors caused by bad input rather than numerical failure.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::InvalidParameter(_) | Error::Domain(_))
    }
}
