use thiserror::Error;

/// Failure to read a model document.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: <{element}>: {message}")]
    Sbml { line: u32, element: String, message: String },
    #[error("{path}: {message}")]
    Native { path: String, message: String },
}
