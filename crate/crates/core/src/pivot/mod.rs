//! The framework-independent network model every other stage reads and writes.

mod compare;
mod model;
mod order;
mod serial;
mod validate;

pub use compare::{differences, structurally_equal, Difference, InputDims};
pub use model::*;
pub use order::{topo_order, OrderError};
pub use serial::{deserialize, serialize, serialize_to_string, PivotError, SCHEMA_VERSION};
pub use validate::{is_identifier, validate, Diagnostic, Rule};
