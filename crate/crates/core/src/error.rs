use thiserror::Error;

/// Errors raised by the spacetime, solver, algebra and check layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid spacetime: {0}")]
    InvalidSpacetime(String),
    #[error("point or support outside the configured window: {0}")]
    OutOfDomain(String),
    #[error("embedding is not injective: {0}")]
    NotInjective(String),
    #[error("image of the embedding is not causally convex")]
    CausalConvexityViolated,
    #[error("embedding does not preserve orientation and time-orientation")]
    OrientationViolated,
    #[error("embedding is not an isometry: {0}")]
    NotIsometric(String),
    #[error("grid spacing mismatch between {0} and {1}")]
    GridMismatch(f64, f64),
    #[error("mass mismatch between {0} and {1}")]
    MassMismatch(f64, f64),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("time {0} is not inside the solution window")]
    OutOfWindow(f64),
    #[error("elements live on different spacetimes")]
    AmbientMismatch,
    #[error("no quasi-free state is available on this spacetime: {0}")]
    StateUnavailable(String),
    #[error("region is not causally convex")]
    NotCausallyConvex,
    #[error("test function support is not contained in the localization region")]
    NotLocalized,
    #[error("regions are not causally separated")]
    NotCausallySeparated,
    #[error("region does not contain a Cauchy surface of the window: {0}")]
    NotCauchySlab(String),
    #[error("supports are not separated by a Cauchy surface")]
    SupportsNotSeparated,
    #[error("term carries no representative test function")]
    MissingRepresentative,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("vector is not cyclic and separating")]
    NotStandard,
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
    #[error("configuration error: {0}")]
    Config(String),
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

pub type Result<T> = std::result::Result<T, Error>;
