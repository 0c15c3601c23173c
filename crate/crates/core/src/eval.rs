//! Star-level matching shared by the engines' reduce functions.

use crate::query::{Bindings, PatternTerm, StarPattern, TriplePattern};
use crate::rdf::Triple;

/// Extends each row with every triple matching `pattern`.
pub fn extend_rows(
    rows: Vec<Bindings>,
    pattern: &TriplePattern,
    triples: &[Triple],
) -> Vec<Bindings> {
    let mut out = Vec::new();
    for row in rows {
        for t in triples {
            if !pattern.admits(t) {
                continue;
            }
            let mut b = row.clone();
            if pattern.match_triple(t, &mut b) {
                out.push(b);
            }
        }
    }
    out
}

/// All bindings of `star` over the triples of one subject, consistent with
/// `seed`. `triples` must be sorted by property for the range lookup.
pub fn match_star(star: &StarPattern, triples: &[Triple], seed: &Bindings) -> Vec<Bindings> {
    let mut rows = vec![seed.clone()];
    for p in &star.patterns {
        let candidates = match p.property.as_const() {
            Some(prop) => property_range(triples, prop),
            None => triples,
        };
        rows = extend_rows(rows, p, candidates);
        if rows.is_empty() {
            break;
        }
    }
    rows
}

/// The slice of `triples` (sorted by property) with property `prop`.
pub fn property_range(triples: &[Triple], prop: crate::rdf::Term) -> &[Triple] {
    let lo = triples.partition_point(|t| t.property < prop);
    let hi = triples.partition_point(|t| t.property <= prop);
    &triples[lo..hi]
}

/// Sorts a subject's triples by property then object, removing duplicates.
pub fn sort_group(triples: &mut Vec<Triple>) {
    triples.sort_by_key(|t| (t.property, t.object, t.subject));
    triples.dedup();
}

/// Whether a triple can contribute to some pattern of `star`.
pub fn star_admits(star: &StarPattern, t: &Triple) -> bool {
    star.patterns.iter().any(|p| p.admits(t))
}

/// True when the star's subject position accepts `subject`.
pub fn subject_fits(star: &StarPattern, subject: crate::rdf::Term) -> bool {
    match &star.subject {
        PatternTerm::Const(c) => *c == subject,
        PatternTerm::Var(_) => !subject.is_literal(),
    }
}
