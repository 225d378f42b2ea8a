//! Fields of graphs over a finite base, the trees built from free products and
//! amalgams, and the staged construction of fundamental sub-forests.

mod bass_serre;
mod extract;
mod field;
mod staged;

pub use bass_serre::{bass_serre_amalgam, bass_serre_free, ColoredTreeField};
pub use extract::{
    contract, extract_treeing, fundamental_subforest, quasi_free_check, treeing_from_fd_section, Subforest,
};
pub use field::{from_graphing, is_treefield, FiberWitness, FieldError, GraphField, RestrictedField, WitnessKind};
pub use staged::{grow_forest, ForestNode, Policy, StagedForest, Start};
