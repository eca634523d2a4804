use std::fmt;

use thiserror::Error;

/// Location-tagged failure while reading one of the text formats.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// 1-based line number, 0 when the error is not tied to a line.
    pub line: usize,
    pub reason: String,
}

impl ParseError {
    pub fn new(line: usize, reason: impl Into<String>) -> Self {
        ParseError {
            line,
            reason: reason.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.reason)
        } else {
            write!(f, "line {}: {}", self.line, self.reason)
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),

    #[error("word {word:?} has length {len}; relation words need length >= 2")]
    WordTooShort { word: String, len: usize },

    #[error("letter {0:?} is not in the alphabet")]
    LetterNotInAlphabet(char),

    #[error("invalid alphabet: {0}")]
    BadAlphabet(String),

    #[error("element id {id} out of range for domain of size {n}")]
    IdOutOfRange { id: u32, n: u32 },

    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),

    #[error(
        "unknown language variant {0:?} (expected all, none, finite:PATH, cofinite:PATH, dfa:PATH)"
    )]
    UnknownVariant(String),

    #[error("bad parameters: {0}")]
    BadParameters(String),

    #[error("arity mismatch for {symbol}: expected {expected}, got {found}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("operation is not a weak near-unanimity operation: witness x={x}, y={y}")]
    NotWnu { x: u32, y: u32 },

    #[error("shared part mismatch: {0}")]
    SharedPartMismatch(String),

    #[error("input structure is not separated: {0}")]
    NotSeparated(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
