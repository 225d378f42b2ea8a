use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("a space needs at least one point")]
    EmptySpace,
    #[error("point {point} is out of range for a space of size {size}")]
    OutOfRange { point: usize, size: usize },
    #[error("point {0} appears more than once")]
    RepeatedPoint(usize),
    #[error("operands live on spaces of sizes {left} and {right}")]
    SpaceMismatch { left: usize, right: usize },
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("pair ({0}, {0}) is a loop")]
    Loop(usize),
    #[error("pair ({0}, {1}) has no reverse pair")]
    NotSymmetric(usize, usize),
    #[error("join of an empty list")]
    EmptyJoin,
    #[error("point {0} has two images")]
    NotFunctional(usize),
    #[error("point {0} is hit twice")]
    NotInjective(usize),
}
