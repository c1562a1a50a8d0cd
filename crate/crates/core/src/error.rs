use thiserror::Error;

use crate::odeint::OdeError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter outside its admissible interval.
    #[error("range: {0}")]
    Range(String),
    #[error("integrator: {0}")]
    Ode(#[from] OdeError),
    /// An orbit that was expected to be matched fell into a bad bundle.
    #[error("classification: {0}")]
    Classification(String),
    #[error("no bracket: {0}")]
    NoBracket(String),
    #[error("fit: {0}")]
    Fit(String),
    #[error("undefined: {0}")]
    Undefined(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag used in CLI failure lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Range(_) => "range",
            Error::Ode(_) => "integrator",
            Error::Classification(_) => "classification",
            Error::NoBracket(_) => "no-bracket",
            Error::Fit(_) => "fit",
            Error::Undefined(_) => "undefined",
            Error::NotFound(_) => "not-found",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
