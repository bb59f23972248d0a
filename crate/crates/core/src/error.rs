use thiserror::Error;

/// Errors raised by the solver and the verification routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed specification or experiment configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// An operation was called outside its documented domain.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Quadrature or another numerical procedure failed to converge.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// A non-finite state appeared during time stepping.
    #[error("integration became unstable at step {step} (t = {t})")]
    Instability { step: usize, t: f64 },
    /// A theorem check was requested where its hypotheses do not hold.
    #[error("check inapplicable: {0}")]
    Inapplicable(String),
    /// Ratio against a zero initial state.
    #[error("undefined ratio: initial state is zero")]
    UndefinedRatio,
    /// Too few usable modes for a fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    /// Zero right-hand-side norms in a Cauchy problem report.
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    /// Zero frequency under a homogeneous or graded Sobolev weight.
    #[error("zero mode excluded from homogeneous/graded norm")]
    ZeroModeExcluded,
    /// Mismatched shapes between a state and its spectrum.
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
