//! In-memory multi-tenant property graph.

mod canonical;
mod schema;
mod store;
mod value;

pub use canonical::{canonical_form, isomorphic, CanonicalForm};
pub use schema::{EdgeTypeSchema, GraphSchema, LabelSchema};
pub use store::{
    Checkpoint, Direction, Edge, EdgeId, Graph, GraphError, GraphStore, IndexPolicy, Node, NodeId, Properties,
    TenantHandle,
};
pub use value::{PropertyValue, ValueKey};
pub(crate) use value::cmp_int_real;
