use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Non-finite input or a state outside the physical region.
    #[error("domain error: {0}")]
    Domain(String),

    /// A request that is well-formed but not supported by this model.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Incompatible arguments (e.g. a current kind that does not match the bath).
    #[error("usage error: {0}")]
    Usage(String),

    /// Dephasing dynamics leave the Gaussian manifold and cannot be evolved
    /// through the moment equations.
    #[error("dephasing does not preserve Gaussianity: {0}")]
    GaussianityNotPreserved(String),

    /// A numerical estimate is not trustworthy at the requested settings.
    #[error("accuracy error: {0}")]
    Accuracy(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// Explicit grid stepping went unstable.
    #[error("stability failure: {0}")]
    Stability(String),

    /// An internal consistency check (entropy balance, fluctuation theorem) failed.
    #[error("self-check failed: {0}")]
    SelfCheck(String),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Usage(_) | Error::Unsupported(_) => 2,
            Error::GaussianityNotPreserved(_) => 2,
            Error::Domain(_) | Error::Accuracy(_) | Error::Stability(_) => 3,
            Error::SelfCheck(_) => 4,
        }
    }
}
