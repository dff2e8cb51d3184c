use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Invalid model or experiment parameters.
    #[error("configuration error: {0}")]
    Config(String),
    /// The kernel lacks a capability the operation needs (density, invariant law, ...).
    #[error("capability error: {0}")]
    Capability(String),
    /// An argument outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical method failed to converge or detected divergence.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Capability(_) | Error::Domain(_) => 2,
            Error::Numerical(_) => 3,
        }
    }
}
