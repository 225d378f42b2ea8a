//! Instance files, seeded generators and the `arbor` command driver.

pub mod cli;
pub mod gen;
pub mod instance;

pub use cli::{run_command, serialize_certificate, show_tuple, CertificateFile, Outcome};
pub use gen::GeneratorConfig;
pub use instance::{digest, parse_instance, serialize_instance, InstanceError, InstanceFile, RelationSpec, Structure};
