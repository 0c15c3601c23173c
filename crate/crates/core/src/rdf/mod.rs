//! RDF data model: interned terms, triples, set-semantics graphs and the
//! RDFS vocabulary.

mod ntriples;
mod term;
pub mod vocab;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ntriples::{
    parse_ntriples, parse_ntriples_reader, serialize_ntriples, write_ntriples, ParseMode, Parsed,
};
pub use term::{Term, TermData, TermError, TermKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RdfError {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("invalid triple: {0}")]
    InvalidTriple(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub subject: Term,
    pub property: Term,
    pub object: Term,
}

impl Triple {
    /// Checks the positional invariants: an IRI property and a non-literal subject.
    pub fn new(subject: Term, property: Term, object: Term) -> Result<Triple, RdfError> {
        if subject.is_literal() {
            return Err(RdfError::InvalidTriple(format!(
                "literal {subject} in subject position"
            )));
        }
        if !property.is_iri() {
            return Err(RdfError::InvalidTriple(format!(
                "property {property} is not an IRI"
            )));
        }
        Ok(Triple {
            subject,
            property,
            object,
        })
    }

    /// For callers that already hold valid positions.
    pub fn from_parts(subject: Term, property: Term, object: Term) -> Triple {
        debug_assert!(!subject.is_literal() && property.is_iri());
        Triple {
            subject,
            property,
            object,
        }
    }

    pub fn cmp_lexical(&self, other: &Triple) -> std::cmp::Ordering {
        self.subject
            .cmp_lexical(other.subject)
            .then_with(|| self.property.cmp_lexical(other.property))
            .then_with(|| self.object.cmp_lexical(other.object))
    }
}

impl std::fmt::Display for Triple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.property, self.object)
    }
}

/// A set of triples.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    triples: BTreeSet<Triple>,
}

impl Graph {
    pub fn new() -> Graph {
        Graph::default()
    }

    pub fn insert(&mut self, triple: Triple) -> bool {
        self.triples.insert(triple)
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> + '_ {
        self.triples.iter()
    }

    pub fn extend(&mut self, other: &Graph) {
        self.triples.extend(other.triples.iter().copied());
    }

    /// Triples sorted by subject, property, object lexical forms.
    pub fn sorted_lexical(&self) -> Vec<Triple> {
        let mut out: Vec<Triple> = self.triples.iter().copied().collect();
        out.sort_by(Triple::cmp_lexical);
        out
    }
}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        Graph {
            triples: iter.into_iter().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a Graph {
    type Item = &'a Triple;
    type IntoIter = std::collections::btree_set::Iter<'a, Triple>;

    fn into_iter(self) -> Self::IntoIter {
        self.triples.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triple_invariants() {
        let lit = Term::literal("x");
        let iri = Term::iri("http://ex.org/p");
        assert!(Triple::new(lit, iri, iri).is_err());
        assert!(Triple::new(iri, lit, iri).is_err());
        assert!(Triple::new(Term::blank("b0"), iri, lit).is_ok());
    }

    #[test]
    fn graph_has_set_semantics() {
        let a = Term::iri("http://ex.org/a");
        let t = Triple::from_parts(a, a, a);
        let g: Graph = [t, t].into_iter().collect();
        assert_eq!(g.len(), 1);
    }
}
