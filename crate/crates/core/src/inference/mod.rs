//! RDFS schema closure and backward-chaining query rewriting.

mod closure;
mod rewrite;

pub use closure::{compute_schema_closure, SchemaClosure};
pub use rewrite::{
    query_classes, rewrite_to_ucq, rewrite_with_trace, RewriteRule, RewriteStep, RewriteTrace,
};

use thiserror::Error;

use crate::query::{Bindings, TriplePattern};
use crate::rdf::vocab;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InferenceError {
    #[error("{0} is not an RDFS schema property")]
    NonSchemaProperty(String),
}

/// All bindings of a schema pattern against the closure.
pub fn query_closure(
    closure: &SchemaClosure,
    pattern: &TriplePattern,
) -> Result<Vec<Bindings>, InferenceError> {
    match pattern.property.as_const() {
        Some(p) if vocab::vocab().is_schema_property(p) => Ok(closure.query(pattern)),
        _ => Err(InferenceError::NonSchemaProperty(
            pattern.property.to_string(),
        )),
    }
}
