//! Provenance data model: entities, activities, agents and the relations
//! between them, with PROV-N text serialization.

mod json;
mod model;
mod provn;

pub use json::to_json_lines;
pub use model::{
    is_builtin_prefix, prov_type, Attribute, Decimal, Literal, NodeKind, ProvDocument, ProvError, ProvNode,
    ProvRelation, QualifiedName, RelationKind, BUILTIN_PREFIXES,
};
pub use provn::{parse_provn, serialize_provn, ParseError};
