use thiserror::Error;

/// Every failure the library can report.
///
/// Variants fall into three classes that the CLI maps onto exit codes:
/// parameter/domain violations, operations a family does not support, and
/// numerical non-convergence. See [`Error::class`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("scaling error: {0}")]
    Scaling(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("negative amplitude: {0}")]
    NegativeAmplitude(String),
    #[error("rate error: {0}")]
    Rate(String),
    #[error("infinite moment: {0}")]
    InfiniteMoment(String),
    #[error("no root: {0}")]
    NoRoot(String),
    #[error("pmf not strictly decreasing: {0}")]
    NotDecreasing(String),
    #[error("series inversion failed: {0}")]
    Inversion(String),
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error("series divergence: {0}")]
    SeriesDivergence(String),
    #[error("non-normalizable stationary law: {0}")]
    Divergence(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("numerical underflow: {0}")]
    NumericalUnderflow(String),
    #[error("unstable series division: {0}")]
    DivisionInstability(String),
    #[error("chain explosion: {0}")]
    Explosion(String),
    #[error("node budget exceeded: {0}")]
    Budget(String),
    #[error("tail model: {0}")]
    TailModel(String),
}

/// Coarse grouping of [`Error`] variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad parameters or arguments outside a function's domain.
    Parameter,
    /// The family does not support the requested operation.
    Unsupported,
    /// A numerical procedure failed to converge.
    Numeric,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            Parameter(_) | Domain(_) | Rate(_) | NoRoot(_) | NotDecreasing(_) | Inversion(_)
            | InfiniteMoment(_) => ErrorClass::Parameter,
            Scaling(_) | Unsupported(_) | NegativeAmplitude(_) => ErrorClass::Unsupported,
            Convergence(_) | Quadrature(_) | SeriesDivergence(_) | Divergence(_) | Overflow(_)
            | NumericalUnderflow(_) | DivisionInstability(_) | Explosion(_) | Budget(_)
            | TailModel(_) => ErrorClass::Numeric,
        }
    }

    /// Process exit code used by the command-line frontend.
    pub fn exit_code(&self) -> i32 {
        match self.class() {
            ErrorClass::Parameter => 1,
            ErrorClass::Unsupported => 2,
            ErrorClass::Numeric => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
