use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed or non-finite input data.
    #[error("input error: {0}")]
    Input(String),
    /// A scalar parameter outside its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// Evaluation requested outside the domain of an object.
    #[error("domain error: {0}")]
    Domain(String),
    /// A structural hypothesis on the nonlinearity does not hold.
    #[error("hypothesis `{flag}` fails{}", context_suffix(.context))]
    Hypothesis { flag: String, context: String },
    /// The ODE integrator could not make progress.
    #[error("integration failure: {0}")]
    Integration(String),
    /// Quadrature or another numerical routine did not converge.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

fn context_suffix(context: &str) -> String {
    if context.is_empty() {
        String::new()
    } else {
        format!(" ({context})")
    }
}

impl Error {
    pub(crate) fn hypothesis(flag: &str, context: impl Into<String>) -> Self {
        Error::Hypothesis {
            flag: flag.to_string(),
            context: context.into(),
        }
    }

    /// True for failures of a numerical routine rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Integration(_) | Error::Numerical(_))
    }
}
