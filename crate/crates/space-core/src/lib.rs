//! Finite point spaces, equivalence relations on sub-domains, and partial
//! bijections.
//!
//! Points of a space of size `n` are the indices `0..n`. Every relation
//! carries its own domain; class identifiers are the least member of each
//! class, so two relations with the same classes compare equal.

mod error;
mod graphing;
mod iso;
mod relation;
mod set;

pub use error::SpaceError;
pub use graphing::{Graphing, TreeingViolation};
pub use iso::PartialIso;
pub use relation::{DomainKind, EquivRelation};
pub use set::{FiniteSpace, PointSet};
