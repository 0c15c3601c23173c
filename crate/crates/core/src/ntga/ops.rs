use std::collections::{BTreeMap, BTreeSet};

use super::{DisjunctiveStarFilter, JoinSlot, NestedTripleGroup, NtgaError, TripleGroup};
use crate::eval;
use crate::query::{Bindings, GraphPattern, Var};
use crate::rdf::{Term, Triple};

/// Constants one triple pattern fixes besides its property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct PositionConstraint {
    /// `None` admits any subject.
    pub subject: Option<Term>,
    /// `None` admits any object.
    pub object: Option<Term>,
}

impl PositionConstraint {
    fn admits(&self, t: &Triple) -> bool {
        self.subject.is_none_or(|s| s == t.subject) && self.object.is_none_or(|o| o == t.object)
    }
}

/// The TG_LoadFilter condition: relevant properties, each with the
/// alternative subject/object constraints of the patterns that use it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadFilter {
    /// `None` when some alternative has a variable property.
    pub properties: Option<BTreeMap<Term, BTreeSet<PositionConstraint>>>,
}

impl LoadFilter {
    pub fn from_filter(f: &DisjunctiveStarFilter) -> LoadFilter {
        let mut props: BTreeMap<Term, BTreeSet<PositionConstraint>> = BTreeMap::new();
        for alt in &f.alternatives {
            for p in &alt.star.patterns {
                let Some(prop) = p.property.as_const() else {
                    return LoadFilter { properties: None };
                };
                props.entry(prop).or_default().insert(PositionConstraint {
                    subject: p.subject.as_const(),
                    object: p.object.as_const(),
                });
            }
        }
        // An unconstrained alternative subsumes the rest.
        for cs in props.values_mut() {
            let open = PositionConstraint {
                subject: None,
                object: None,
            };
            if cs.contains(&open) {
                *cs = [open].into_iter().collect();
            }
        }
        LoadFilter {
            properties: Some(props),
        }
    }

    pub fn keeps(&self, t: &Triple) -> bool {
        let Some(props) = &self.properties else {
            return true;
        };
        props
            .get(&t.property)
            .is_some_and(|cs| cs.iter().any(|c| c.admits(t)))
    }
}

pub fn tg_load_filter(triples: &[Triple], filter: &LoadFilter) -> Vec<Triple> {
    triples
        .iter()
        .filter(|t| filter.keeps(t))
        .copied()
        .collect()
}

/// Groups triples by subject; groups come out in subject order.
pub fn tg_group_by(triples: &[Triple]) -> Vec<TripleGroup> {
    let mut by_subject: BTreeMap<Term, Vec<Triple>> = BTreeMap::new();
    for t in triples {
        by_subject.entry(t.subject).or_default().push(*t);
    }
    by_subject
        .into_iter()
        .map(|(s, ts)| TripleGroup::new(s, ts))
        .collect()
}

/// Tags each group with every alternative it satisfies and drops untagged groups.
pub fn tg_group_filter(
    groups: Vec<TripleGroup>,
    filter: &DisjunctiveStarFilter,
) -> Vec<TripleGroup> {
    groups
        .into_iter()
        .filter_map(|mut g| {
            g.match_tags = filter.tags(&g);
            (!g.match_tags.is_empty()).then_some(g)
        })
        .collect()
}

/// Content expansion of a nested group: the product of each node's
/// per-pattern matches, consistent with the join slots.
pub fn flatten(ntg: &NestedTripleGroup, branch: &GraphPattern) -> Vec<Bindings> {
    let mut seed = Bindings::new();
    for (v, t) in ntg.slot_bindings() {
        if seed.insert(v, t).is_some_and(|old| old != t) {
            return Vec::new();
        }
    }
    let mut rows = vec![seed];
    for node in ntg.nodes() {
        let star = &branch.stars[node.star];
        rows = rows
            .iter()
            .flat_map(|r| eval::match_star(star, &node.root.triples, r))
            .collect();
        if rows.is_empty() {
            break;
        }
    }
    rows
}

fn star_vars(branch: &GraphPattern, star: usize) -> BTreeSet<Var> {
    branch.stars[star].vars()
}

/// Variables shared by the already joined stars and the next one.
pub(crate) fn key_vars(branch: &GraphPattern, left: &BTreeSet<usize>, right: usize) -> Vec<Var> {
    let l: BTreeSet<Var> = left.iter().flat_map(|&s| star_vars(branch, s)).collect();
    star_vars(branch, right).intersection(&l).cloned().collect()
}

fn project(rows: &[Bindings], vars: &[Var]) -> BTreeSet<Vec<Term>> {
    rows.iter()
        .map(|r| vars.iter().map(|v| r[v]).collect())
        .collect()
}

pub(crate) fn left_keys(
    ntg: &NestedTripleGroup,
    branch: &GraphPattern,
    vars: &[Var],
) -> BTreeSet<Vec<Term>> {
    project(&flatten(ntg, branch), vars)
}

pub(crate) fn right_keys(
    g: &TripleGroup,
    branch: &GraphPattern,
    star: usize,
    vars: &[Var],
) -> BTreeSet<Vec<Term>> {
    project(
        &eval::match_star(&branch.stars[star], &g.triples, &Bindings::new()),
        vars,
    )
}

/// Nests `right` under the first left node sharing a join variable.
pub(crate) fn join_one(
    left: &NestedTripleGroup,
    right: &TripleGroup,
    branch: &GraphPattern,
    right_star: usize,
    vars: &[Var],
    key: &[Term],
) -> NestedTripleGroup {
    let rv = star_vars(branch, right_star);
    let parent = left
        .nodes()
        .iter()
        .map(|n| n.star)
        .find(|&s| {
            star_vars(branch, s)
                .iter()
                .any(|v| rv.contains(v) && vars.contains(v))
        })
        .unwrap_or(left.star);
    let slot = JoinSlot {
        bindings: vars.iter().cloned().zip(key.iter().copied()).collect(),
    };
    let mut out = left.clone();
    out.attach(
        parent,
        slot,
        NestedTripleGroup::leaf(right_star, right.clone()),
    );
    out
}

/// Joins partial matches of `branch` with groups for star `right_star` on
/// all variables the two sides share.
pub fn tg_join(
    left: &[NestedTripleGroup],
    right: &[TripleGroup],
    branch: &GraphPattern,
    right_star: usize,
) -> Vec<NestedTripleGroup> {
    let Some(first) = left.first() else {
        return Vec::new();
    };
    let vars = key_vars(branch, &first.stars(), right_star);
    let mut index: BTreeMap<Vec<Term>, Vec<&TripleGroup>> = BTreeMap::new();
    for g in right {
        for k in right_keys(g, branch, right_star, &vars) {
            index.entry(k).or_default().push(g);
        }
    }
    let mut out = Vec::new();
    for l in left {
        for k in left_keys(l, branch, &vars) {
            for r in index.get(&k).into_iter().flatten() {
                out.push(join_one(l, r, branch, right_star, &vars, &k));
            }
        }
    }
    out
}

/// One branch's side of a grouped join.
#[derive(Debug, Clone)]
pub struct UJoinOperand<'a> {
    pub branch: &'a GraphPattern,
    pub left: Vec<NestedTripleGroup>,
    pub right_star: usize,
}

/// Performs the joins of several branches in one pass over `right`. Every
/// operand must join on the same variables. Results are tagged with the
/// operand index and equal the union of per-operand [`tg_join`] calls.
pub fn tg_ujoin(
    operands: &[UJoinOperand<'_>],
    right: &[TripleGroup],
) -> Result<Vec<(usize, NestedTripleGroup)>, NtgaError> {
    let mut shared: Option<Vec<Var>> = None;
    let mut vars_per_op = Vec::new();
    for op in operands {
        let left_stars = op.left.first().map(|l| l.stars()).unwrap_or_default();
        let vars = key_vars(op.branch, &left_stars, op.right_star);
        if op.left.is_empty() {
            vars_per_op.push(vars);
            continue;
        }
        match &shared {
            Some(s) if *s != vars => {
                return Err(NtgaError::IncompatibleGrouping(format!(
                    "join variables {vars:?} differ from {s:?}"
                )))
            }
            _ => shared = Some(vars.clone()),
        }
        vars_per_op.push(vars);
    }
    let mut index: BTreeMap<Vec<Term>, Vec<(usize, &TripleGroup)>> = BTreeMap::new();
    for g in right {
        let mut seen: BTreeMap<Vec<Term>, BTreeSet<usize>> = BTreeMap::new();
        for (i, op) in operands.iter().enumerate() {
            for k in right_keys(g, op.branch, op.right_star, &vars_per_op[i]) {
                seen.entry(k).or_default().insert(i);
            }
        }
        for (k, ops) in seen {
            index
                .entry(k)
                .or_default()
                .extend(ops.into_iter().map(|i| (i, g)));
        }
    }
    let mut out = Vec::new();
    for (i, op) in operands.iter().enumerate() {
        for l in &op.left {
            for k in left_keys(l, op.branch, &vars_per_op[i]) {
                for (j, r) in index.get(&k).into_iter().flatten() {
                    if *j == i {
                        out.push((
                            i,
                            join_one(l, r, op.branch, op.right_star, &vars_per_op[i], &k),
                        ));
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse_query;

    fn ex(s: &str) -> Term {
        Term::iri(&format!("http://ex.org/{s}"))
    }

    fn t(s: &str, p: &str, o: Term) -> Triple {
        Triple::from_parts(ex(s), ex(p), o)
    }

    #[test]
    fn load_filter_drops_irrelevant_properties() {
        let q = parse_query(
            "PREFIX e: <http://ex.org/> SELECT * { ?s e:type ?c . ?s e:commonName ?n }",
        )
        .unwrap();
        let f = LoadFilter::from_filter(&DisjunctiveStarFilter::from_ucq(&q));
        let data = vec![
            t("a", "type", ex("T")),
            t("a", "commonName", Term::literal("x")),
            t("a", "sequence", Term::literal("ACGT")),
            t("b", "type", ex("T")),
            t("b", "sequence", Term::literal("GG")),
            t("c", "commonName", Term::literal("y")),
        ];
        let kept = tg_load_filter(&data, &f);
        assert_eq!(kept.len(), 4);
        assert!(kept.iter().all(|t| t.property != ex("sequence")));
        assert!(tg_load_filter(
            &data,
            &LoadFilter {
                properties: Some(BTreeMap::new())
            }
        )
        .is_empty());
    }

    #[test]
    fn union_of_allowed_constants() {
        let q = parse_query(
            "PREFIX e: <http://ex.org/> SELECT * { { ?s e:type e:A } UNION { ?s e:type e:B } }",
        )
        .unwrap();
        let f = LoadFilter::from_filter(&DisjunctiveStarFilter::from_ucq(&q));
        assert!(f.keeps(&t("x", "type", ex("A"))));
        assert!(f.keeps(&t("x", "type", ex("B"))));
        assert!(!f.keeps(&t("x", "type", ex("C"))));
    }

    #[test]
    fn group_by_and_flatten_cardinality() {
        let q = parse_query(
            "PREFIX e: <http://ex.org/> SELECT * { ?s e:a ?x . ?s e:b ?y . ?s e:c ?z }",
        )
        .unwrap();
        let data = vec![
            t("s", "a", ex("1")),
            t("s", "b", ex("2")),
            t("s", "b", ex("3")),
            t("s", "c", ex("4")),
        ];
        let groups = tg_group_filter(tg_group_by(&data), &DisjunctiveStarFilter::from_ucq(&q));
        assert_eq!(groups.len(), 1);
        let ntg = NestedTripleGroup::leaf(0, groups[0].clone());
        assert_eq!(flatten(&ntg, &q.branches[0]).len(), 2);
    }

    #[test]
    fn join_on_subject_object() {
        let q =
            parse_query("PREFIX e: <http://ex.org/> SELECT * { ?a e:p ?b . ?b e:q ?c }").unwrap();
        let br = &q.branches[0];
        let left = tg_group_by(&[t("a", "p", ex("b"))]);
        let right = tg_group_by(&[t("b", "q", ex("z")), t("c", "q", ex("w"))]);
        let lnt: Vec<NestedTripleGroup> = left
            .into_iter()
            .map(|g| NestedTripleGroup::leaf(0, g))
            .collect();
        let out = tg_join(&lnt, &right, br, 1);
        assert_eq!(out.len(), 1);
        assert_eq!(flatten(&out[0], br).len(), 1);
        assert!(tg_join(&[], &right, br, 1).is_empty());
    }

    #[test]
    fn ujoin_rejects_mismatched_keys() {
        let q = parse_query(
            "PREFIX e: <http://ex.org/> SELECT * { { ?a e:p ?b . ?b e:q ?c } UNION { ?a e:p ?b . ?c e:q ?a } }",
        )
        .unwrap();
        let g = tg_group_by(&[t("a", "p", ex("b"))]);
        let mk = |b: usize| UJoinOperand {
            branch: &q.branches[b],
            left: vec![NestedTripleGroup::leaf(0, g[0].clone())],
            right_star: 1,
        };
        assert!(matches!(
            tg_ujoin(&[mk(0), mk(1)], &[]),
            Err(NtgaError::IncompatibleGrouping(_))
        ));
    }
}
