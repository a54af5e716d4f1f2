use std::fmt;

use thiserror::Error;

/// Which of the resource-block constraints an allocation broke.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    /// More than one slice owns the same resource block.
    SliceOverlap { rb: usize },
    /// More UE/RB grants than resource blocks exist.
    TotalBudget { used: usize, total: usize },
    /// A UE was granted a block that its slice does not own.
    ForeignBlock { ue: usize, rb: usize },
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::SliceOverlap { rb } => {
                write!(f, "resource block {rb} is owned by more than one slice")
            }
            Constraint::TotalBudget { used, total } => {
                write!(f, "{used} grants exceed the {total} available resource blocks")
            }
            Constraint::ForeignBlock { ue, rb } => {
                write!(f, "UE {ue} holds resource block {rb} outside its slice")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("constraint violated: {0}")]
    ConstraintViolation(Constraint),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite gradient in `{0}`, update refused")]
    PoisonedUpdate(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
