use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("{what} needs n = {n} qubits/bits, above the dense limit of {limit}")]
    Capacity { what: &'static str, n: usize, limit: usize },

    #[error("operators do not pairwise commute (indices {0} and {1})")]
    Inconsistent(usize, usize),

    #[error("the generated group contains -I (operator {0} contradicts earlier signs)")]
    Contradiction(usize),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("attack failed: {0}")]
    AttackFailure(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("trial {trial}: {source}")]
    Trial { trial: usize, source: Box<Error> },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
