//! Union-of-conjunctive-query evaluation over RDF on a simulated MapReduce
//! runtime, with RDFS-aware query rewriting, a triplegroup engine and two relational
//! baseline plans.

pub mod bench;
pub mod corpus;
mod eval;
pub mod inference;
pub mod mr;
pub mod ntga;
pub mod planner;
pub mod query;
pub mod rdf;
pub mod relational;
pub mod solution;
