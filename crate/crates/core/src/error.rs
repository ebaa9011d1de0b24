use core::fmt;

/// Errors reported by the solver core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A label is outside the domain required by the selected loss.
    InvalidLabel { expected: &'static str, got: f64 },
    /// A dual value lies outside the feasible set of the conjugate.
    Infeasible { value: f64 },
    /// Vector/matrix dimensions do not agree.
    ShapeMismatch { expected: usize, got: usize },
    /// Hyperparameter validation failed.
    InvalidHyperparams(&'static str),
    /// Invalid problem data (non-finite entries, empty matrix, ...).
    InvalidData(&'static str),
    /// An iterate became non-finite.
    Diverged { iteration: usize },
    /// The requested configuration is not supported by this operation.
    Unsupported(&'static str),
    /// A scalar argument is outside its domain.
    Domain(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidLabel { expected, got } => {
                write!(f, "invalid label {got}: expected {expected}")
            }
            Error::Infeasible { value } => {
                write!(f, "dual value {value} outside the feasible set")
            }
            Error::ShapeMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::InvalidHyperparams(msg) => write!(f, "invalid hyperparameters: {msg}"),
            Error::InvalidData(msg) => write!(f, "invalid problem data: {msg}"),
            Error::Diverged { iteration } => {
                write!(f, "numerical divergence at iteration {iteration}")
            }
            Error::Unsupported(msg) => write!(f, "unsupported configuration: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
        }
    }
}
