//! Free-product and amalgam verification, desingularization of tree fields,
//! and subrelation decompositions with checkable certificates.

mod certificate;
mod check;
mod desing;
mod error;
mod kurosh;
mod product;
mod tuple;

pub use certificate::{Certificate, FactorRecord};
pub use check::{check_certificate, CheckContext, CheckError};
pub use desing::{
    desingularize, generation_split, geodesic_amalgam, representatives_forest, validate_desingularization, Bullet,
    BulletViolation, Desingularization, ExtraEdge, GenerationSplit, GraphOfRelations, RelationEdge,
};
pub use error::DecompError;
pub use kurosh::{kurosh, restrict_decomposition, Factor, KuroshDecomposition, RestrictionDecomposition};
pub use product::{
    stabilizer_decomposition, union_treeing, verify_amalgam, verify_free_product, verify_product, ProductCertificate,
    Verdict,
};
pub use tuple::{find_closing_tuple, is_reduced, ReducedTuple};
