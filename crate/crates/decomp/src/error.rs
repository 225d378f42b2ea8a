use fibered::FiberError;
use space_core::SpaceError;
use thiserror::Error;
use treefield::FieldError;

use crate::ReducedTuple;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecompError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Fiber(#[from] FiberError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("step {0} is not in the relation named by its tag")]
    TagMismatch(usize),
    #[error("a factor (or the core) is not contained in the ambient relation")]
    NotSubrelation,
    #[error("the factors do not generate the pair ({0}, {1})")]
    NotGenerated(usize, usize),
    #[error("hypothesis violated: {hypothesis} (witness {witness})")]
    HypothesisViolation { hypothesis: &'static str, witness: usize },
    #[error("the two tree vertices coincide")]
    EmptyGeodesic,
    #[error("the two carriers do not meet")]
    EmptyIntersection,
    #[error("not a free product: closing tuple {0:?}")]
    NotFreeProduct(ReducedTuple),
    #[error("point {0} lies in no factor domain")]
    CoverageViolation(usize),
    #[error("internal invariant failed: {0}")]
    Internal(String),
}
