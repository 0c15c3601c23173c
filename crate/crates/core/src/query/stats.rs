//! Structural statistics of a query: pattern, star and join counts.
//!
//! Counts are taken over distinct items across all branches. A star is
//! identified by its subject and its set of constant properties, so two
//! branches repeating the same star count it once even if one object
//! constant differs. A join edge is identified by the identities of its two
//! stars, the shared variable and the join kind.

use std::collections::BTreeSet;

use serde::Serialize;

use super::{GraphPattern, JoinKind, PatternTerm, StarPattern, TriplePattern, Ucq};
use crate::rdf::Term;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueryStats {
    pub num_triple_patterns: usize,
    pub num_star_patterns: usize,
    /// Edge counts per star of the first branch, in star order.
    pub edges_per_star: Vec<usize>,
    /// Compact rendering of edges per star across branches.
    pub edges_cell: String,
    pub num_so_joins: usize,
    pub num_oo_joins: usize,
    pub union_width: usize,
    /// True when branches have different star shapes.
    pub branches_differ: bool,
}

type StarIdentity = (PatternTerm, BTreeSet<Term>);

fn identity(star: &StarPattern) -> StarIdentity {
    (star.subject.clone(), star.required_properties.clone())
}

pub fn compute_stats(q: &Ucq) -> QueryStats {
    let patterns: BTreeSet<&TriplePattern> = q.branches.iter().flat_map(|b| b.patterns()).collect();
    let stars: BTreeSet<StarIdentity> = q
        .branches
        .iter()
        .flat_map(|b| b.stars.iter().map(identity))
        .collect();

    let mut joins = BTreeSet::new();
    for b in &q.branches {
        for e in &b.join_edges {
            let mut a = identity(&b.stars[e.left]);
            let mut c = identity(&b.stars[e.right]);
            if c < a {
                std::mem::swap(&mut a, &mut c);
            }
            joins.insert((a, c, e.var.clone(), e.kind));
        }
    }
    let num_so_joins = joins
        .iter()
        .filter(|j| j.3 == JoinKind::SubjectObject)
        .count();

    let shapes: BTreeSet<Vec<(StarIdentity, usize)>> = q
        .branches
        .iter()
        .map(|b| b.stars.iter().map(|s| (identity(s), s.edges())).collect())
        .collect();

    QueryStats {
        num_triple_patterns: patterns.len(),
        num_star_patterns: stars.len(),
        edges_per_star: q
            .branches
            .first()
            .map(|b| b.stars.iter().map(StarPattern::edges).collect())
            .unwrap_or_default(),
        edges_cell: edges_cell(&q.branches),
        num_so_joins,
        num_oo_joins: joins.len() - num_so_joins,
        union_width: q.width(),
        branches_differ: shapes.len() > 1,
    }
}

fn colon_list(counts: &[usize]) -> String {
    counts
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(":")
}

/// Single-branch queries list every star's edge count. Unions whose stars
/// all have the same count collapse to that count. Otherwise branches are
/// aligned by star subject: the leading part where branches disagree is
/// shown per branch in parentheses, the shared tail once.
fn edges_cell(branches: &[GraphPattern]) -> String {
    let Some(first) = branches.first() else {
        return String::new();
    };
    if branches.len() == 1 {
        let counts: Vec<usize> = first.stars.iter().map(StarPattern::edges).collect();
        return colon_list(&counts);
    }
    let all: BTreeSet<usize> = branches
        .iter()
        .flat_map(|b| b.stars.iter().map(StarPattern::edges))
        .collect();
    if all.len() == 1 {
        return all.into_iter().next().unwrap().to_string();
    }

    let mut subjects: Vec<&PatternTerm> = Vec::new();
    for b in branches {
        for s in &b.stars {
            if !subjects.contains(&&s.subject) {
                subjects.push(&s.subject);
            }
        }
    }
    let rows: Vec<Vec<usize>> = branches
        .iter()
        .map(|b| {
            subjects
                .iter()
                .map(|subj| {
                    b.stars
                        .iter()
                        .filter(|s| &&s.subject == subj)
                        .map(StarPattern::edges)
                        .sum()
                })
                .collect()
        })
        .collect();
    let uniform = |i: usize| rows.iter().all(|r| r[i] == rows[0][i]);
    match (0..subjects.len()).rev().find(|&i| !uniform(i)) {
        None => colon_list(&rows[0]),
        Some(last) => {
            let head: Vec<String> = rows
                .iter()
                .map(|r| format!("({})", colon_list(&r[..=last])))
                .collect();
            let mut cell = head.join("/");
            for c in &rows[0][last + 1..] {
                cell.push(':');
                cell.push_str(&c.to_string());
            }
            cell
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse_query;

    fn stats(q: &str) -> QueryStats {
        compute_stats(&parse_query(q).unwrap())
    }

    #[test]
    fn single_star() {
        let s = stats("SELECT * { ?s a <T> ; <p> ?o ; <q> ?r }");
        assert_eq!(s.num_triple_patterns, 3);
        assert_eq!(s.num_star_patterns, 1);
        assert_eq!(s.edges_cell, "3");
        assert_eq!((s.num_so_joins, s.num_oo_joins), (0, 0));
    }

    #[test]
    fn chain_and_object_joins() {
        let s = stats("SELECT * { ?a <p> ?b . ?a <q> ?c . ?b <r> ?c }");
        assert_eq!(s.edges_cell, "2:1");
        assert_eq!(s.num_so_joins, 1);
        assert_eq!(s.num_oo_joins, 1);
    }

    #[test]
    fn repeated_branch_items_count_once() {
        let s = stats("SELECT * { { ?s <p> ?o . ?s <q> <A> } UNION { ?s <p> ?o . ?s <q> <B> } }");
        assert_eq!(s.num_triple_patterns, 3);
        assert_eq!(s.num_star_patterns, 1);
        assert_eq!(s.edges_cell, "2");
        assert!(!s.branches_differ);
    }

    #[test]
    fn aligned_rendering() {
        let s = stats(
            "SELECT * { { ?p <a> ?x . ?p <b> ?y . ?x <c> ?z . ?y a <T> } \
             UNION { ?p <a> ?x . ?p <b> ?y . ?y a <T> } }",
        );
        assert_eq!(s.edges_cell, "(2:1)/(2:0):1");
        assert!(s.branches_differ);
    }
}
