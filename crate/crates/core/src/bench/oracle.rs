//! Reference implementations used to check the engines: naive, but
//! written independently of them.

use std::collections::HashMap;

use crate::query::{Bindings, PatternTerm, TriplePattern, Ucq};
use crate::rdf::vocab::vocab;
use crate::rdf::{Graph, Term, Triple};
use crate::solution::SolutionSet;

fn index(g: &Graph, property: Term) -> HashMap<Term, Vec<Term>> {
    let mut m: HashMap<Term, Vec<Term>> = HashMap::new();
    for t in g.iter().filter(|t| t.property == property) {
        m.entry(t.subject).or_default().push(t.object);
    }
    m
}

/// Materializes `data ∪ schema` under rdfs2, 3, 5, 7, 9 and 11 by applying
/// every rule to every triple until nothing new appears.
pub fn oracle_forward_chain(data: &Graph, schema: &Graph) -> Graph {
    let v = vocab();
    let mut g = data.clone();
    g.extend(schema);
    loop {
        let sc = index(&g, v.sub_class_of);
        let sp = index(&g, v.sub_property_of);
        let dom = index(&g, v.domain);
        let rng = index(&g, v.range);
        let none = Vec::new();
        let mut fresh = Vec::new();
        for t in g.iter() {
            if t.property == v.sub_class_of {
                for c in sc.get(&t.object).unwrap_or(&none) {
                    fresh.push(Triple::from_parts(t.subject, v.sub_class_of, *c));
                }
            }
            if t.property == v.sub_property_of {
                for p in sp.get(&t.object).unwrap_or(&none) {
                    fresh.push(Triple::from_parts(t.subject, v.sub_property_of, *p));
                }
            }
            if t.property == v.rdf_type {
                for c in sc.get(&t.object).unwrap_or(&none) {
                    fresh.push(Triple::from_parts(t.subject, v.rdf_type, *c));
                }
            }
            for p in sp.get(&t.property).unwrap_or(&none) {
                fresh.push(Triple::from_parts(t.subject, *p, t.object));
            }
            for c in dom.get(&t.property).unwrap_or(&none) {
                fresh.push(Triple::from_parts(t.subject, v.rdf_type, *c));
            }
            if !t.object.is_literal() {
                for c in rng.get(&t.property).unwrap_or(&none) {
                    fresh.push(Triple::from_parts(t.object, v.rdf_type, *c));
                }
            }
        }
        let before = g.len();
        for t in fresh {
            g.insert(t);
        }
        if g.len() == before {
            return g;
        }
    }
}

/// Triples by property, by (property, subject) and by (property, object).
struct Index<'a> {
    all: &'a [Triple],
    by_p: HashMap<Term, Vec<Triple>>,
    by_ps: HashMap<(Term, Term), Vec<Triple>>,
    by_po: HashMap<(Term, Term), Vec<Triple>>,
}

impl<'a> Index<'a> {
    fn new(all: &'a [Triple]) -> Index<'a> {
        let mut ix = Index {
            all,
            by_p: HashMap::new(),
            by_ps: HashMap::new(),
            by_po: HashMap::new(),
        };
        for t in all {
            ix.by_p.entry(t.property).or_default().push(*t);
            ix.by_ps
                .entry((t.property, t.subject))
                .or_default()
                .push(*t);
            ix.by_po.entry((t.property, t.object)).or_default().push(*t);
        }
        ix
    }

    fn candidates(&self, p: &TriplePattern, row: &Bindings) -> &[Triple] {
        let value = |t: &PatternTerm| match t {
            PatternTerm::Const(c) => Some(*c),
            PatternTerm::Var(v) => row.get(v).copied(),
        };
        let hit = match (value(&p.property), value(&p.subject), value(&p.object)) {
            (Some(pr), Some(s), _) => self.by_ps.get(&(pr, s)),
            (Some(pr), None, Some(o)) => self.by_po.get(&(pr, o)),
            (Some(pr), None, None) => self.by_p.get(&pr),
            (None, ..) => return self.all,
        };
        hit.map_or(&[], |v| v.as_slice())
    }
}

fn bound_positions(p: &TriplePattern, row: &Bindings) -> usize {
    p.positions()
        .iter()
        .filter(|t| t.as_var().is_none_or(|v| row.contains_key(v)))
        .count()
}

fn extend(ix: &Index, mut patterns: Vec<&TriplePattern>, row: Bindings, out: &mut Vec<Bindings>) {
    let Some(best) =
        (0..patterns.len()).max_by_key(|&i| (bound_positions(patterns[i], &row), usize::MAX - i))
    else {
        out.push(row);
        return;
    };
    let next = patterns.remove(best);
    for t in ix.candidates(next, &row) {
        let mut r = row.clone();
        if next.match_triple(t, &mut r) {
            extend(ix, patterns.clone(), r, out);
        }
    }
}

/// Evaluates every branch by nested loops over the graph, binding the
/// most constrained remaining pattern first, and unions the projected answers.
pub fn oracle_match(q: &Ucq, g: &Graph) -> SolutionSet {
    let triples: Vec<Triple> = g.iter().copied().collect();
    let ix = Index::new(&triples);
    let mut out = SolutionSet::new(q.projection.clone());
    for branch in &q.branches {
        let mut rows = Vec::new();
        extend(&ix, branch.patterns().collect(), Bindings::new(), &mut rows);
        out.extend(
            rows.into_iter()
                .filter_map(|r| branch.finish(r))
                .map(|r| q.project(&r)),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse_query;
    use crate::rdf::vocab::{RDFS_DOMAIN_IRI, RDFS_SUBCLASSOF_IRI, RDF_TYPE_IRI};

    fn ex(s: &str) -> Term {
        Term::iri(&format!("http://ex.org/{s}"))
    }

    #[test]
    fn domain_typing() {
        let data: Graph = [Triple::from_parts(
            ex("8801"),
            ex("commonName"),
            Term::literal("Ostrich"),
        )]
        .into_iter()
        .collect();
        let schema: Graph = [Triple::from_parts(
            ex("commonName"),
            Term::iri(RDFS_DOMAIN_IRI),
            ex("Taxon"),
        )]
        .into_iter()
        .collect();
        let g = oracle_forward_chain(&data, &schema);
        assert!(g.contains(&Triple::from_parts(
            ex("8801"),
            Term::iri(RDF_TYPE_IRI),
            ex("Taxon")
        )));
        assert_eq!(g.len(), 3);
    }

    #[test]
    fn empty_inputs() {
        assert!(oracle_forward_chain(&Graph::new(), &Graph::new()).is_empty());
    }

    #[test]
    fn two_level_chain() {
        let sub = Term::iri(RDFS_SUBCLASSOF_IRI);
        let ty = Term::iri(RDF_TYPE_IRI);
        let schema: Graph = [
            Triple::from_parts(ex("A"), sub, ex("B")),
            Triple::from_parts(ex("B"), sub, ex("C")),
        ]
        .into_iter()
        .collect();
        let data: Graph = [Triple::from_parts(ex("x"), ty, ex("A"))]
            .into_iter()
            .collect();
        let g = oracle_forward_chain(&data, &schema);
        for c in ["A", "B", "C"] {
            assert!(g.contains(&Triple::from_parts(ex("x"), ty, ex(c))));
        }
        assert!(g.contains(&Triple::from_parts(ex("A"), sub, ex("C"))));
        assert_eq!(g.len(), 6);
    }

    #[test]
    fn match_on_empty_and_ground() {
        let q = parse_query("SELECT * { <http://ex.org/a> <http://ex.org/p> <http://ex.org/b> }")
            .unwrap();
        assert!(oracle_match(&q, &Graph::new()).is_empty());
        let g: Graph = [Triple::from_parts(ex("a"), ex("p"), ex("b"))]
            .into_iter()
            .collect();
        let s = oracle_match(&q, &g);
        assert_eq!(s.len(), 1);
        assert!(s.contains(&vec![]));
    }
}
