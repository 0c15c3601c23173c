use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io::{BufRead, Write};

use crate::query::{Bindings, TriplePattern};
use crate::rdf::{self, vocab, Graph, ParseMode, RdfError, Term, Triple};

/// Transitive closure of an RDFS schema.
///
/// A class sits in its own closure only when it lies on a subclass cycle.
/// The accessors return strict relations, which never include the class
/// itself. Domains and ranges are inherited by subproperties and propagated
/// to every superclass of the declared class.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SchemaClosure {
    super_classes: BTreeMap<Term, BTreeSet<Term>>,
    sub_classes: BTreeMap<Term, BTreeSet<Term>>,
    super_properties: BTreeMap<Term, BTreeSet<Term>>,
    sub_properties: BTreeMap<Term, BTreeSet<Term>>,
    domains: BTreeMap<Term, BTreeSet<Term>>,
    ranges: BTreeMap<Term, BTreeSet<Term>>,
    graph: Graph,
    by_property: BTreeMap<Term, Vec<Triple>>,
    by_subject: BTreeMap<(Term, Term), Vec<Triple>>,
    by_object: BTreeMap<(Term, Term), Vec<Triple>>,
    ignored: usize,
}

fn ancestors(direct: &BTreeMap<Term, BTreeSet<Term>>, start: Term) -> BTreeSet<Term> {
    let mut seen = BTreeSet::new();
    let mut queue: VecDeque<Term> = direct.get(&start).into_iter().flatten().copied().collect();
    while let Some(t) = queue.pop_front() {
        if seen.insert(t) {
            queue.extend(direct.get(&t).into_iter().flatten().copied());
        }
    }
    seen
}

fn invert(rel: &BTreeMap<Term, BTreeSet<Term>>) -> BTreeMap<Term, BTreeSet<Term>> {
    let mut out: BTreeMap<Term, BTreeSet<Term>> = BTreeMap::new();
    for (a, bs) in rel {
        for b in bs {
            out.entry(*b).or_default().insert(*a);
        }
    }
    out
}

impl SchemaClosure {
    /// Closes the schema triples of `schema`. Triples whose property is not
    /// subClassOf, subPropertyOf, domain or range are skipped and counted.
    pub fn build(schema: &Graph) -> SchemaClosure {
        compute_schema_closure(schema)
    }
}

/// Closes the schema triples of `schema`; see [`SchemaClosure::build`].
pub fn compute_schema_closure(schema: &Graph) -> SchemaClosure {
    {
        let v = vocab::vocab();
        let mut sc: BTreeMap<Term, BTreeSet<Term>> = BTreeMap::new();
        let mut sp: BTreeMap<Term, BTreeSet<Term>> = BTreeMap::new();
        let mut dom: BTreeMap<Term, BTreeSet<Term>> = BTreeMap::new();
        let mut rng: BTreeMap<Term, BTreeSet<Term>> = BTreeMap::new();
        let mut ignored = 0;
        for t in schema {
            let target = if t.property == v.sub_class_of {
                &mut sc
            } else if t.property == v.sub_property_of {
                &mut sp
            } else if t.property == v.domain {
                &mut dom
            } else if t.property == v.range {
                &mut rng
            } else {
                ignored += 1;
                continue;
            };
            target.entry(t.subject).or_default().insert(t.object);
        }
        if ignored > 0 {
            log::warn!("ignored {ignored} non-schema triples while building the closure");
        }

        let mut classes: BTreeSet<Term> = sc.keys().copied().collect();
        classes.extend(sc.values().flatten().copied());
        classes.extend(dom.values().flatten().copied());
        classes.extend(rng.values().flatten().copied());
        let super_classes: BTreeMap<Term, BTreeSet<Term>> = classes
            .iter()
            .map(|&c| (c, ancestors(&sc, c)))
            .filter(|(_, a)| !a.is_empty())
            .collect();

        let mut props: BTreeSet<Term> = sp.keys().copied().collect();
        props.extend(sp.values().flatten().copied());
        props.extend(dom.keys().copied());
        props.extend(rng.keys().copied());
        let super_properties: BTreeMap<Term, BTreeSet<Term>> = props
            .iter()
            .map(|&p| (p, ancestors(&sp, p)))
            .filter(|(_, a)| !a.is_empty())
            .collect();

        let inherit = |direct: &BTreeMap<Term, BTreeSet<Term>>| {
            let mut out: BTreeMap<Term, BTreeSet<Term>> = BTreeMap::new();
            for &p in &props {
                let mut cs = BTreeSet::new();
                let own = std::iter::once(p)
                    .chain(super_properties.get(&p).into_iter().flatten().copied());
                for q in own {
                    for &c in direct.get(&q).into_iter().flatten() {
                        cs.insert(c);
                        cs.extend(super_classes.get(&c).into_iter().flatten().copied());
                    }
                }
                if !cs.is_empty() {
                    out.insert(p, cs);
                }
            }
            out
        };
        let domains = inherit(&dom);
        let ranges = inherit(&rng);

        let mut graph = Graph::new();
        let mut add = |rel: &BTreeMap<Term, BTreeSet<Term>>, p: Term| {
            for (a, bs) in rel {
                for b in bs {
                    graph.insert(Triple::from_parts(*a, p, *b));
                }
            }
        };
        add(&super_classes, v.sub_class_of);
        add(&super_properties, v.sub_property_of);
        add(&domains, v.domain);
        add(&ranges, v.range);

        let mut by_property: BTreeMap<Term, Vec<Triple>> = BTreeMap::new();
        let mut by_subject: BTreeMap<(Term, Term), Vec<Triple>> = BTreeMap::new();
        let mut by_object: BTreeMap<(Term, Term), Vec<Triple>> = BTreeMap::new();
        for t in &graph {
            by_property.entry(t.property).or_default().push(*t);
            by_subject
                .entry((t.property, t.subject))
                .or_default()
                .push(*t);
            by_object
                .entry((t.property, t.object))
                .or_default()
                .push(*t);
        }

        SchemaClosure {
            sub_classes: invert(&super_classes),
            sub_properties: invert(&super_properties),
            super_classes,
            super_properties,
            domains,
            ranges,
            graph,
            by_property,
            by_subject,
            by_object,
            ignored,
        }
    }
}

impl SchemaClosure {
    fn get(rel: &BTreeMap<Term, BTreeSet<Term>>, t: Term) -> impl Iterator<Item = Term> + '_ {
        rel.get(&t)
            .into_iter()
            .flatten()
            .copied()
            .filter(move |&x| x != t)
    }

    pub fn sub_classes(&self, c: Term) -> impl Iterator<Item = Term> + '_ {
        Self::get(&self.sub_classes, c)
    }

    pub fn super_classes(&self, c: Term) -> impl Iterator<Item = Term> + '_ {
        Self::get(&self.super_classes, c)
    }

    pub fn sub_properties(&self, p: Term) -> impl Iterator<Item = Term> + '_ {
        Self::get(&self.sub_properties, p)
    }

    pub fn super_properties(&self, p: Term) -> impl Iterator<Item = Term> + '_ {
        Self::get(&self.super_properties, p)
    }

    pub fn domains(&self, p: Term) -> impl Iterator<Item = Term> + '_ {
        Self::get(&self.domains, p)
    }

    pub fn ranges(&self, p: Term) -> impl Iterator<Item = Term> + '_ {
        Self::get(&self.ranges, p)
    }

    /// Properties whose closed domain contains `c`.
    pub fn properties_with_domain(&self, c: Term) -> Vec<Term> {
        self.domains
            .iter()
            .filter(|(_, cs)| cs.contains(&c))
            .map(|(p, _)| *p)
            .collect()
    }

    /// Properties whose closed range contains `c`.
    pub fn properties_with_range(&self, c: Term) -> Vec<Term> {
        self.ranges
            .iter()
            .filter(|(_, cs)| cs.contains(&c))
            .map(|(p, _)| *p)
            .collect()
    }

    /// Number of input triples that were not schema triples.
    pub fn ignored(&self) -> usize {
        self.ignored
    }

    /// The closed schema as a graph.
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.graph.contains(t)
    }

    /// Evaluates a single pattern against the closed schema.
    pub fn query(&self, pattern: &TriplePattern) -> Vec<Bindings> {
        let candidates: Box<dyn Iterator<Item = &Triple>> = match (
            pattern.property.as_const(),
            pattern.subject.as_const(),
            pattern.object.as_const(),
        ) {
            (Some(p), Some(s), _) => Box::new(self.by_subject.get(&(p, s)).into_iter().flatten()),
            (Some(p), None, Some(o)) => Box::new(self.by_object.get(&(p, o)).into_iter().flatten()),
            (Some(p), None, None) => Box::new(self.by_property.get(&p).into_iter().flatten()),
            (None, ..) => Box::new(self.graph.iter()),
        };
        candidates
            .filter_map(|t| {
                let mut b = Bindings::new();
                pattern.match_triple(t, &mut b).then_some(b)
            })
            .collect()
    }

    pub fn write<W: Write>(&self, out: W) -> std::io::Result<()> {
        rdf::write_ntriples(&self.graph, out)
    }

    /// Loads a closure persisted with [`SchemaClosure::write`]. Closing an
    /// already closed schema is a no-op, so any schema file is accepted.
    pub fn read<R: BufRead>(input: R) -> Result<SchemaClosure, RdfError> {
        let parsed = rdf::parse_ntriples_reader(input, ParseMode::Strict)?;
        Ok(SchemaClosure::build(&parsed.graph))
    }
}
