use thiserror::Error;

/// Every failure the library reports. Variants carry the measured quantity
/// that tripped the check so reports can echo it.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("imaginary part of the period matrix is not positive definite (min eigenvalue {0:e})")]
    NonPositivePeriod(f64),
    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("discretization does not match bundle kind: {0}")]
    DiscMismatch(String),
    #[error("bidegree ({0},{1}) is out of range")]
    BidegreeOverflow(usize, usize),
    #[error("bidegree underflow: {0}")]
    BidegreeUnderflow(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("eigensolver failed: {0}")]
    EigenFailure(String),
    #[error("form has a harmonic component (relative size {0:e})")]
    NotCoexact(f64),
    #[error("form is not dbar-closed (relative residual {0:e})")]
    NotClosed(f64),
    #[error("no eigenvalue above the kernel cut")]
    EmptySpectrum,
    #[error("extension is not admissible (residual {0:e})")]
    ExtensionNotAdmissible(f64),
    #[error("hodge package unavailable: {0}")]
    HodgeUnavailable(String),
    #[error("form is not primitive (relative residual {0:e})")]
    NotPrimitive(f64),
    #[error("curvature commutator is not invertible (min eigenvalue {0:e})")]
    CurvatureNotInvertible(f64),
    #[error("finite-difference step {0:e} is below the cancellation limit")]
    StepTooSmall(f64),
    #[error("projector rank changes inside the stencil ({0} vs {1})")]
    RankJump(usize, usize),
    #[error("lower-right block is singular (min eigenvalue {0:e})")]
    SingularBlock(f64),
    #[error("stencil quadrature failed: {0}")]
    StencilQuadratureFailure(String),
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
