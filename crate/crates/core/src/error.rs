use thiserror::Error;

/// Everything that can go wrong across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("descriptor mismatch: {0}")]
    DescriptorMismatch(String),
    #[error("structure violation: {0}")]
    StructureViolation(String),
    #[error("element is not positive (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("element is singular (smallest singular value {sigma_min:e})")]
    Singular { sigma_min: f64 },
    #[error("operator is not in GL+: {0}")]
    NotInGlPlus(String),
    #[error("operator is not self-adjoint (asymmetry {asymmetry:e})")]
    NotSelfAdjoint { asymmetry: f64 },
    #[error("Neumann iteration did not reach tolerance after {iterations} iterations (relative residual {residual:e})")]
    MaxIterExceeded { iterations: usize, residual: f64 },
    #[error("family is not a controlled frame: {0}")]
    NotAFrame(String),
    #[error("operator is not surjective (smallest singular value {sigma_min:e})")]
    NotSurjective { sigma_min: f64 },
    #[error("transform does not commute with the controller (‖KC - CK‖ = {defect:e})")]
    NonCommuting { defect: f64 },
    #[error("frame operator is not a multiplication operator (defect {defect:e})")]
    NotMultiplicationOperator { defect: f64 },
    #[error("algebra is not commutative")]
    NotCommutative,
    #[error("invalid measure space: {0}")]
    InvalidMeasure(String),
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error in `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn mismatch(what: impl Into<String>) -> Self {
        Error::DescriptorMismatch(what.into())
    }

    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Input errors (bad files, bad parameters) as opposed to failed verifications.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse(_) | Error::Validation { .. } | Error::Io(_) | Error::InvalidMeasure(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
