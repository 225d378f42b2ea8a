use space_core::SpaceError;
use thiserror::Error;

/// First violated law found while checking an action table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionViolation {
    /// The table was built for a different carrier.
    Shape,
    /// No entry for a related pair.
    Missing { x: usize, y: usize },
    /// `(x, y) · t` does not lie over `x`.
    WrongFiber { x: usize, y: usize, t: usize },
    /// `(x, x) · t != t`.
    Identity { x: usize, t: usize },
    /// `(x, y) · _` is not a bijection between fibers.
    NotBijective { x: usize, y: usize },
    /// `(x, y) · ((y, z) · t) != (x, z) · t`.
    Cocycle { x: usize, y: usize, z: usize, t: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FiberError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("fiber over {0} is empty")]
    EmptyFiber(usize),
    #[error("carrier point over {0} with label {1:?} appears twice")]
    DuplicatePoint(usize, Vec<usize>),
    #[error("acting relation must be defined on the whole base")]
    PartialRelation,
    #[error("invalid action: {0:?}")]
    InvalidAction(ActionViolation),
    #[error("section value {1} does not lie over {0}")]
    SectionOffFiber(usize, usize),
    #[error("not a sub-relation")]
    NotSubrelation,
    #[error("domain is not complete")]
    NotCompleteDomain,
    #[error("section is not saturating")]
    NotSaturating,
    #[error("stabilizers are not nested: ({0}, {1}) fixes the first section only")]
    StabilizerNotIncluded(usize, usize),
    #[error("section image is not a fundamental domain of the orbit relation")]
    NotFundamentalDomain,
    #[error("map sends {0} off its fiber")]
    MorphismOffFiber(usize),
    #[error("map is not equivariant at ({x}, {t})")]
    NotEquivariant { x: usize, t: usize },
    #[error("reduction check failed at {0}")]
    BadReduction(usize),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
}
