use std::fmt;

use thiserror::Error;

/// Failure while turning source text into an [`Expression`](crate::expr::Expression).
///
/// Positions are 0-based character offsets into the source.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("unexpected character '{ch}' at position {pos}")]
    Lex { ch: char, pos: usize },
    #[error("malformed number '{text}' at position {pos}")]
    BadNumber { text: String, pos: usize },
    #[error("unexpected token {found} at position {pos}, expected {expected}")]
    Unexpected {
        found: String,
        expected: &'static str,
        pos: usize,
    },
    #[error("unknown identifier '{name}' at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("exponent at position {pos} must be a constant")]
    NonConstantExponent { pos: usize },
}

impl ParseError {
    pub fn position(&self) -> Option<usize> {
        match self {
            ParseError::Empty => None,
            ParseError::Lex { pos, .. }
            | ParseError::BadNumber { pos, .. }
            | ParseError::Unexpected { pos, .. }
            | ParseError::UnknownIdentifier { pos, .. }
            | ParseError::NonConstantExponent { pos } => Some(*pos),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalErrorKind {
    /// The subterm is undefined at the point (log of a nonpositive number, division by zero, ...).
    Domain,
    /// The subterm is defined but has no derivative there (abs at 0, sqrt at 0, ...).
    NonDifferentiable,
}

/// Evaluation failure, carrying the offending subterm and the point it was reached at.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub subterm: String,
    pub reason: &'static str,
    pub x: f64,
    pub y: f64,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            EvalErrorKind::Domain => "domain error",
            EvalErrorKind::NonDifferentiable => "not differentiable",
        };
        write!(
            f,
            "{what} in `{}` at (x, y) = ({}, {}): {}",
            self.subterm, self.x, self.y, self.reason
        )
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
