//! Fibered spaces over a finite base, actions of equivalence relations on them,
//! sections and their stabilizers, and the quotient spaces `R/S`.

mod action;
mod error;
mod sections;
mod space;

pub use action::{
    canonical_left, orbit_relation, quotient, right_quotient, right_quotient_symmetry, stabilizer, validate_action,
    verify_morphism, Action,
};
pub use error::{ActionViolation, FiberError};
pub use sections::{
    canonical_iso, exhaust_sections, extend_to_canonical, induced_morphism, is_homogeneous, rf_fundamental_domain,
    saturation_subspace, section_stabilizer, stable_conjugacy_witness, verify_reduction, Extension, Reduction,
};
pub use space::{FiberedMorphism, FiberedSpace, PartialSection};
