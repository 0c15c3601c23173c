use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use super::SchemaClosure;
use crate::query::{
    decompose_stars, Bindings, GraphPattern, PatternTerm, QueryError, TriplePattern, Ucq, Var,
};
use crate::rdf::{vocab, Term, Triple};

/// A backward-chaining rule: when `trigger` unifies with a query pattern and
/// the closed schema contains a triple matching `schema`, the pattern may be
/// replaced by `result`.
///
/// All three patterns share one template vocabulary. The template variable
/// `fresh` stands for a new variable on every application.
#[derive(Debug, Clone)]
pub struct RewriteRule {
    pub name: &'static str,
    pub schema: TriplePattern,
    pub trigger: TriplePattern,
    pub result: TriplePattern,
    /// Template variable whose query term must not bind to a literal.
    pub non_literal: Option<Var>,
}

const FRESH: &str = "fresh";

fn tv(name: &str) -> PatternTerm {
    PatternTerm::var(name)
}

impl RewriteRule {
    /// The four rules covering subclass, domain, range and subproperty entailment.
    pub fn rdfs() -> Vec<RewriteRule> {
        let v = vocab::vocab();
        let ty = PatternTerm::Const(v.rdf_type);
        vec![
            RewriteRule {
                name: "rdfs9",
                schema: TriplePattern::new(tv("d"), v.sub_class_of, tv("c")),
                trigger: TriplePattern::new(tv("s"), ty.clone(), tv("c")),
                result: TriplePattern::new(tv("s"), ty.clone(), tv("d")),
                non_literal: None,
            },
            RewriteRule {
                name: "rdfs2",
                schema: TriplePattern::new(tv("p"), v.domain, tv("c")),
                trigger: TriplePattern::new(tv("s"), ty.clone(), tv("c")),
                result: TriplePattern::new(tv("s"), tv("p"), tv(FRESH)),
                non_literal: None,
            },
            RewriteRule {
                name: "rdfs3",
                schema: TriplePattern::new(tv("p"), v.range, tv("c")),
                trigger: TriplePattern::new(tv("s"), ty, tv("c")),
                result: TriplePattern::new(tv(FRESH), tv("p"), tv("s")),
                non_literal: Some(Var::new("s")),
            },
            RewriteRule {
                name: "rdfs7",
                schema: TriplePattern::new(tv("q"), v.sub_property_of, tv("p")),
                trigger: TriplePattern::new(tv("s"), tv("p"), tv("o")),
                result: TriplePattern::new(tv("s"), tv("q"), tv("o")),
                non_literal: None,
            },
        ]
    }

    fn unify(&self, pattern: &TriplePattern) -> Option<BTreeMap<Var, PatternTerm>> {
        let mut env = BTreeMap::new();
        for (t, q) in self
            .trigger
            .positions()
            .into_iter()
            .zip(pattern.positions())
        {
            match t {
                PatternTerm::Const(c) => {
                    if q.as_const() != Some(*c) {
                        return None;
                    }
                }
                PatternTerm::Var(v) => match env.get(v) {
                    Some(prev) if prev != q => return None,
                    _ => {
                        env.insert(v.clone(), q.clone());
                    }
                },
            }
        }
        Some(env)
    }

    /// The schema pattern with trigger variables replaced by the query's constants.
    fn schema_query(&self, env: &BTreeMap<Var, PatternTerm>) -> TriplePattern {
        let sub = |p: &PatternTerm| match p {
            PatternTerm::Var(v) => match env.get(v) {
                Some(PatternTerm::Const(c)) => PatternTerm::Const(*c),
                _ => p.clone(),
            },
            c => c.clone(),
        };
        TriplePattern {
            subject: sub(&self.schema.subject),
            property: sub(&self.schema.property),
            object: sub(&self.schema.object),
        }
    }

    /// Replaces pattern `index` of `branch` using one schema triple.
    /// Returns `None` when the rule does not fire for that triple.
    pub fn apply(
        &self,
        branch: &GraphPattern,
        index: usize,
        schema_triple: &Triple,
        fresh: &Var,
    ) -> Option<GraphPattern> {
        let mut patterns: Vec<TriplePattern> = branch.patterns().cloned().collect();
        let target = patterns.get(index)?;
        let mut env = self.unify(target)?;
        let mut schema_env = Bindings::new();
        if !self
            .schema_query(&env)
            .match_triple(schema_triple, &mut schema_env)
        {
            return None;
        }
        for (v, t) in schema_env {
            env.entry(v).or_insert(PatternTerm::Const(t));
        }
        env.insert(Var::new(FRESH), PatternTerm::Var(fresh.clone()));
        let inst = |p: &PatternTerm| match p {
            PatternTerm::Var(v) => env.get(v).cloned(),
            c => Some(c.clone()),
        };
        let result = TriplePattern {
            subject: inst(&self.result.subject)?,
            property: inst(&self.result.property)?,
            object: inst(&self.result.object)?,
        };
        if result.property.as_const().is_some_and(|p| !p.is_iri())
            || result.subject.as_const().is_some_and(|s| s.is_literal())
        {
            return None;
        }
        let mut non_literal = branch.non_literal.clone();
        if let Some(g) = &self.non_literal {
            match env.get(g) {
                Some(PatternTerm::Var(v)) => {
                    non_literal.insert(v.clone());
                }
                Some(PatternTerm::Const(c)) if c.is_literal() => return None,
                _ => {}
            }
        }
        patterns[index] = result;
        let mut out = decompose_stars(branch.id, patterns);
        out.bindings = branch.bindings.clone();
        out.non_literal = non_literal;
        Some(out)
    }
}

/// One derivation step of a rewriting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteStep {
    pub parent: usize,
    pub child: usize,
    pub pattern_index: usize,
    pub rule: &'static str,
    pub schema_triple: Triple,
    pub fresh: Var,
}

/// Every branch reached by a rewriting, with how it was derived.
/// Branches `0..roots` come directly from the input query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteTrace {
    pub branches: Vec<GraphPattern>,
    pub roots: usize,
    pub steps: Vec<RewriteStep>,
}

impl RewriteTrace {
    /// Re-derives every step against `closure`, checking that each schema
    /// triple is entailed and each child follows from its parent.
    pub fn replay(&self, closure: &SchemaClosure) -> Result<(), String> {
        let rules = RewriteRule::rdfs();
        for (n, step) in self.steps.iter().enumerate() {
            if !closure.contains(&step.schema_triple) {
                return Err(format!(
                    "step {n}: {} is not in the schema closure",
                    step.schema_triple
                ));
            }
            let rule = rules
                .iter()
                .find(|r| r.name == step.rule)
                .ok_or_else(|| format!("step {n}: unknown rule {}", step.rule))?;
            let parent = self
                .branches
                .get(step.parent)
                .ok_or_else(|| format!("step {n}: missing parent"))?;
            let child = self
                .branches
                .get(step.child)
                .ok_or_else(|| format!("step {n}: missing child"))?;
            let derived = rule
                .apply(parent, step.pattern_index, &step.schema_triple, &step.fresh)
                .ok_or_else(|| format!("step {n}: {} does not fire", step.rule))?;
            if derived.canonical_key() != child.canonical_key() {
                return Err(format!(
                    "step {n}: derived branch differs from recorded child"
                ));
            }
        }
        Ok(())
    }
}

fn is_schema_pattern(p: &TriplePattern) -> bool {
    p.property
        .as_const()
        .is_some_and(|t| vocab::vocab().is_schema_property(t))
}

/// Evaluates the schema patterns of a branch against the closure and
/// substitutes each solution into the remaining patterns.
fn resolve_schema_patterns(
    branch: &GraphPattern,
    closure: &SchemaClosure,
) -> Result<Vec<GraphPattern>, QueryError> {
    let (schema, rest): (Vec<TriplePattern>, Vec<TriplePattern>) =
        branch.patterns().cloned().partition(is_schema_pattern);
    if schema.is_empty() {
        return Ok(vec![branch.clone()]);
    }
    if rest.is_empty() {
        return Err(QueryError::UnsupportedConstruct(
            "branch with only schema patterns under inference".into(),
        ));
    }
    let mut solutions = vec![Bindings::new()];
    for p in &schema {
        let mut next = Vec::new();
        for s in &solutions {
            for m in closure.query(&p.substitute(s)) {
                let mut joined = s.clone();
                joined.extend(m);
                next.push(joined);
            }
        }
        solutions = next;
    }
    Ok(solutions
        .into_iter()
        .map(|s| {
            let pats = rest.iter().map(|p| p.substitute(&s)).collect();
            let mut g = decompose_stars(branch.id, pats);
            g.bindings = branch.bindings.clone();
            g.bindings.extend(s);
            g.non_literal = branch.non_literal.clone();
            g
        })
        .collect())
}

fn check_supported(branch: &GraphPattern) -> Result<(), QueryError> {
    let ty = vocab::vocab().rdf_type;
    for p in branch.patterns() {
        if p.property.as_var().is_some() {
            return Err(QueryError::UnsupportedConstruct(format!(
                "variable property in {p} under inference"
            )));
        }
        if p.property.as_const() == Some(ty) && p.object.as_var().is_some() {
            return Err(QueryError::UnsupportedConstruct(format!(
                "unbound class variable in {p} under inference"
            )));
        }
    }
    Ok(())
}

/// Rewrites `q` into a union whose evaluation over the explicit triples
/// equals the evaluation of `q` over the RDFS entailment of data and schema.
pub fn rewrite_to_ucq(q: &Ucq, closure: &SchemaClosure) -> Result<Ucq, QueryError> {
    rewrite_with_trace(q, closure).map(|(u, _)| u)
}

pub fn rewrite_with_trace(
    q: &Ucq,
    closure: &SchemaClosure,
) -> Result<(Ucq, RewriteTrace), QueryError> {
    let rules = RewriteRule::rdfs();
    let mut seen: HashSet<String> = HashSet::new();
    let mut branches: Vec<GraphPattern> = Vec::new();
    for b in &q.branches {
        for r in resolve_schema_patterns(b, closure)? {
            check_supported(&r)?;
            if seen.insert(r.canonical_key()) {
                branches.push(r);
            }
        }
    }
    let roots = branches.len();
    let mut steps = Vec::new();
    let mut queue: VecDeque<usize> = (0..roots).collect();
    let mut fresh_counter = q
        .branches
        .iter()
        .flat_map(|b| b.vars())
        .filter(Var::is_fresh)
        .count();
    while let Some(parent) = queue.pop_front() {
        let count = branches[parent].pattern_count();
        for index in 0..count {
            let target = branches[parent].patterns().nth(index).cloned().unwrap();
            for rule in &rules {
                let Some(env) = rule.unify(&target) else {
                    continue;
                };
                let sq = rule.schema_query(&env);
                for m in closure.query(&sq) {
                    let schema_triple = Triple::from_parts(
                        ground(&sq.subject, &m),
                        ground(&sq.property, &m),
                        ground(&sq.object, &m),
                    );
                    let fresh = Var::fresh(fresh_counter);
                    let Some(child) = rule.apply(&branches[parent], index, &schema_triple, &fresh)
                    else {
                        continue;
                    };
                    if !seen.insert(child.canonical_key()) {
                        continue;
                    }
                    if rule.result.vars().any(|v| v.name() == FRESH) {
                        fresh_counter += 1;
                    }
                    let child_idx = branches.len();
                    steps.push(RewriteStep {
                        parent,
                        child: child_idx,
                        pattern_index: index,
                        rule: rule.name,
                        schema_triple,
                        fresh,
                    });
                    branches.push(child);
                    queue.push_back(child_idx);
                }
            }
        }
    }
    for (i, b) in branches.iter_mut().enumerate() {
        b.id = i;
    }
    let ucq = Ucq {
        branches: branches.clone(),
        projection: q.projection.clone(),
    };
    Ok((
        ucq,
        RewriteTrace {
            branches,
            roots,
            steps,
        },
    ))
}

fn ground(p: &PatternTerm, m: &Bindings) -> Term {
    match p {
        PatternTerm::Const(c) => *c,
        PatternTerm::Var(v) => m[v],
    }
}

/// Distinct classes mentioned in type patterns of a query.
pub fn query_classes(q: &Ucq) -> BTreeSet<Term> {
    let ty = vocab::vocab().rdf_type;
    q.branches
        .iter()
        .flat_map(|b| b.patterns())
        .filter(|p| p.property.as_const() == Some(ty))
        .filter_map(|p| p.object.as_const())
        .collect()
}
