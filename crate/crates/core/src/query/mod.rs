//! Query model: triple patterns, subject-keyed star patterns, branch graph
//! patterns and unions of conjunctive queries.

mod parser;
mod stats;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rdf::{vocab, Term, Triple};

pub use parser::{parse_optional_query, parse_query, OptionalQuery};
pub use stats::{compute_stats, QueryStats};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unsupported construct: {0}")]
    UnsupportedConstruct(String),
}

/// A query variable, stored without the leading `?`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Var(Arc<str>);

pub const FRESH_PREFIX: &str = "_fresh_";

impl Var {
    pub fn new(name: &str) -> Var {
        Var(Arc::from(name.trim_start_matches('?')))
    }

    pub fn fresh(n: usize) -> Var {
        Var::new(&format!("{FRESH_PREFIX}{n}"))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    pub fn is_fresh(&self) -> bool {
        self.0.starts_with(FRESH_PREFIX)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PatternTerm {
    Var(Var),
    Const(Term),
}

impl PatternTerm {
    pub fn var(name: &str) -> PatternTerm {
        PatternTerm::Var(Var::new(name))
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            PatternTerm::Var(v) => Some(v),
            PatternTerm::Const(_) => None,
        }
    }

    pub fn as_const(&self) -> Option<Term> {
        match self {
            PatternTerm::Const(t) => Some(*t),
            PatternTerm::Var(_) => None,
        }
    }

    /// Matches a data term, extending `bindings`; returns false on conflict.
    pub fn bind(&self, term: Term, bindings: &mut Bindings) -> bool {
        match self {
            PatternTerm::Const(c) => *c == term,
            PatternTerm::Var(v) => match bindings.get(v) {
                Some(bound) => *bound == term,
                None => {
                    bindings.insert(v.clone(), term);
                    true
                }
            },
        }
    }
}

impl From<Term> for PatternTerm {
    fn from(t: Term) -> Self {
        PatternTerm::Const(t)
    }
}

impl From<Var> for PatternTerm {
    fn from(v: Var) -> Self {
        PatternTerm::Var(v)
    }
}

impl fmt::Display for PatternTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternTerm::Var(v) => write!(f, "{v}"),
            PatternTerm::Const(t) => write!(f, "{t}"),
        }
    }
}

impl fmt::Debug for PatternTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Variable bindings of one solution or partial solution.
pub type Bindings = BTreeMap<Var, Term>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub property: PatternTerm,
    pub object: PatternTerm,
}

impl TriplePattern {
    pub fn new(
        subject: impl Into<PatternTerm>,
        property: impl Into<PatternTerm>,
        object: impl Into<PatternTerm>,
    ) -> TriplePattern {
        TriplePattern {
            subject: subject.into(),
            property: property.into(),
            object: object.into(),
        }
    }

    pub fn positions(&self) -> [&PatternTerm; 3] {
        [&self.subject, &self.property, &self.object]
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> + '_ {
        self.positions().into_iter().filter_map(PatternTerm::as_var)
    }

    pub fn is_ground(&self) -> bool {
        self.vars().next().is_none()
    }

    /// Checks constant positions only.
    pub fn admits(&self, t: &Triple) -> bool {
        self.subject.as_const().is_none_or(|c| c == t.subject)
            && self.property.as_const().is_none_or(|c| c == t.property)
            && self.object.as_const().is_none_or(|c| c == t.object)
    }

    /// Full match, including repeated variables and existing bindings.
    pub fn match_triple(&self, t: &Triple, bindings: &mut Bindings) -> bool {
        self.subject.bind(t.subject, bindings)
            && self.property.bind(t.property, bindings)
            && self.object.bind(t.object, bindings)
    }

    pub fn substitute(&self, map: &Bindings) -> TriplePattern {
        let sub = |p: &PatternTerm| match p {
            PatternTerm::Var(v) => map
                .get(v)
                .map(|t| PatternTerm::Const(*t))
                .unwrap_or_else(|| p.clone()),
            c => c.clone(),
        };
        TriplePattern {
            subject: sub(&self.subject),
            property: sub(&self.property),
            object: sub(&self.object),
        }
    }

    pub fn is_type_pattern(&self) -> bool {
        self.property.as_const() == Some(vocab::vocab().rdf_type)
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.subject, self.property, self.object)
    }
}

impl fmt::Debug for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

/// Triple patterns sharing one subject position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StarPattern {
    /// Position of the star inside its branch.
    pub id: usize,
    pub subject: PatternTerm,
    pub patterns: Vec<TriplePattern>,
    pub required_properties: BTreeSet<Term>,
}

impl StarPattern {
    pub fn new(id: usize, subject: PatternTerm, patterns: Vec<TriplePattern>) -> StarPattern {
        debug_assert!(patterns.iter().all(|p| p.subject == subject));
        let required_properties = patterns
            .iter()
            .filter_map(|p| p.property.as_const())
            .collect();
        StarPattern {
            id,
            subject,
            patterns,
            required_properties,
        }
    }

    pub fn edges(&self) -> usize {
        self.patterns.len()
    }

    /// Variables in subject and object positions plus property variables, deduplicated.
    pub fn vars(&self) -> BTreeSet<Var> {
        self.patterns
            .iter()
            .flat_map(|p| p.vars().cloned())
            .collect()
    }

    pub fn has_var_property(&self) -> bool {
        self.patterns.iter().any(|p| p.property.as_var().is_some())
    }

    /// Position-independent identity: the sorted pattern set.
    pub fn content_key(&self) -> Vec<TriplePattern> {
        let mut k = self.patterns.clone();
        k.sort();
        k.dedup();
        k
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Position {
    Subject,
    Object,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum JoinKind {
    SubjectObject,
    ObjectObject,
}

/// A variable shared between two stars of one branch.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JoinEdge {
    pub left: usize,
    pub left_pos: Position,
    pub right: usize,
    pub right_pos: Position,
    pub var: Var,
    pub kind: JoinKind,
}

/// One conjunctive branch: stars, the join edges between them, plus the
/// constant bindings and non-literal guards introduced by rewriting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphPattern {
    pub id: usize,
    pub stars: Vec<StarPattern>,
    pub join_edges: Vec<JoinEdge>,
    /// Variables fixed to constants when schema patterns were resolved.
    pub bindings: Bindings,
    /// Variables that may not be bound to literals.
    pub non_literal: BTreeSet<Var>,
}

impl GraphPattern {
    pub fn from_patterns(id: usize, patterns: Vec<TriplePattern>) -> GraphPattern {
        decompose_stars(id, patterns)
    }

    /// Patterns in star order.
    pub fn patterns(&self) -> impl Iterator<Item = &TriplePattern> + '_ {
        self.stars.iter().flat_map(|s| s.patterns.iter())
    }

    pub fn pattern_count(&self) -> usize {
        self.stars.iter().map(StarPattern::edges).sum()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut vs: BTreeSet<Var> = self.patterns().flat_map(|p| p.vars().cloned()).collect();
        vs.extend(self.bindings.keys().cloned());
        vs
    }

    /// Applies rewrite-time bindings and guards to a complete match of the
    /// branch's patterns. Returns `None` when a guard rejects it.
    pub fn finish(&self, mut row: Bindings) -> Option<Bindings> {
        for v in &self.non_literal {
            if row.get(v).is_some_and(|t| t.is_literal()) {
                return None;
            }
        }
        for (v, t) in &self.bindings {
            match row.get(v) {
                Some(bound) if bound != t => return None,
                Some(_) => {}
                None => {
                    row.insert(v.clone(), *t);
                }
            }
        }
        Some(row)
    }

    /// Order-insensitive identity, with fresh variables renamed by first
    /// occurrence. Two branches with equal keys have equal answers.
    pub fn canonical_key(&self) -> String {
        let placeholder = |p: &PatternTerm| match p {
            PatternTerm::Var(v) if v.is_fresh() => "?_".to_string(),
            other => format!("{other:?}"),
        };
        let mut pats: Vec<&TriplePattern> = self.patterns().collect();
        pats.sort_by_cached_key(|p| {
            (
                placeholder(&p.subject),
                placeholder(&p.property),
                placeholder(&p.object),
                (*p).clone(),
            )
        });
        let mut renames: BTreeMap<Var, usize> = BTreeMap::new();
        let mut out = String::new();
        let mut render = |p: &PatternTerm, out: &mut String| match p {
            PatternTerm::Var(v) if v.is_fresh() => {
                let n = renames.len();
                let n = *renames.entry(v.clone()).or_insert(n);
                out.push_str(&format!("?_f{n} "));
            }
            other => out.push_str(&format!("{other:?} ")),
        };
        for p in pats {
            render(&p.subject, &mut out);
            render(&p.property, &mut out);
            render(&p.object, &mut out);
            out.push('|');
        }
        for (v, t) in &self.bindings {
            out.push_str(&format!("{v}={t:?};"));
        }
        out.push('#');
        for v in &self.non_literal {
            match renames.get(v) {
                Some(n) => out.push_str(&format!("?_f{n};")),
                None => out.push_str(&format!("{v};")),
            }
        }
        out
    }
}

/// Groups patterns by subject into stars (first-occurrence order) and derives
/// one join edge per pair of stars per shared subject/object variable.
pub fn decompose_stars(id: usize, patterns: Vec<TriplePattern>) -> GraphPattern {
    let mut order: Vec<PatternTerm> = Vec::new();
    let mut groups: BTreeMap<PatternTerm, Vec<TriplePattern>> = BTreeMap::new();
    for p in patterns {
        if !groups.contains_key(&p.subject) {
            order.push(p.subject.clone());
        }
        groups.entry(p.subject.clone()).or_default().push(p);
    }
    let stars: Vec<StarPattern> = order
        .into_iter()
        .enumerate()
        .map(|(i, subj)| {
            let pats = groups.remove(&subj).unwrap_or_default();
            StarPattern::new(i, subj, pats)
        })
        .collect();
    let join_edges = join_edges(&stars);
    GraphPattern {
        id,
        stars,
        join_edges,
        bindings: Bindings::new(),
        non_literal: BTreeSet::new(),
    }
}

fn node_vars(star: &StarPattern) -> BTreeMap<Var, Position> {
    let mut out = BTreeMap::new();
    for p in &star.patterns {
        if let PatternTerm::Var(v) = &p.object {
            out.entry(v.clone()).or_insert(Position::Object);
        }
    }
    if let PatternTerm::Var(v) = &star.subject {
        out.insert(v.clone(), Position::Subject);
    }
    out
}

fn join_edges(stars: &[StarPattern]) -> Vec<JoinEdge> {
    let vars: Vec<BTreeMap<Var, Position>> = stars.iter().map(node_vars).collect();
    let mut edges = Vec::new();
    for i in 0..stars.len() {
        for j in (i + 1)..stars.len() {
            for (v, &pi) in &vars[i] {
                if let Some(&pj) = vars[j].get(v) {
                    let kind = if pi == Position::Subject || pj == Position::Subject {
                        JoinKind::SubjectObject
                    } else {
                        JoinKind::ObjectObject
                    };
                    edges.push(JoinEdge {
                        left: i,
                        left_pos: pi,
                        right: j,
                        right_pos: pj,
                        var: v.clone(),
                        kind,
                    });
                }
            }
        }
    }
    edges
}

/// A union of conjunctive queries with a shared projection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ucq {
    pub branches: Vec<GraphPattern>,
    pub projection: Vec<Var>,
}

impl Ucq {
    pub fn new(projection: Vec<Var>, branches: Vec<Vec<TriplePattern>>) -> Ucq {
        let branches = branches
            .into_iter()
            .enumerate()
            .map(|(i, ps)| GraphPattern::from_patterns(i, ps))
            .collect();
        Ucq {
            branches,
            projection,
        }
    }

    pub fn width(&self) -> usize {
        self.branches.len()
    }

    /// Projects a finished branch row onto the query's projection.
    pub fn project(&self, row: &Bindings) -> Vec<Option<Term>> {
        self.projection
            .iter()
            .map(|v| row.get(v).copied())
            .collect()
    }

    pub fn max_stars(&self) -> usize {
        self.branches
            .iter()
            .map(|b| b.stars.len())
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for Ucq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SELECT")?;
        for v in &self.projection {
            write!(f, " {v}")?;
        }
        writeln!(f, " WHERE {{")?;
        for (i, b) in self.branches.iter().enumerate() {
            if i > 0 {
                writeln!(f, "  UNION")?;
            }
            for (v, t) in &b.bindings {
                writeln!(f, "  # bind {v} = {t}")?;
            }
            if !b.non_literal.is_empty() {
                let vs: Vec<String> = b.non_literal.iter().map(|v| v.to_string()).collect();
                writeln!(f, "  # non-literal {}", vs.join(" "))?;
            }
            writeln!(f, "  {{")?;
            for p in b.patterns() {
                writeln!(f, "    {p} .")?;
            }
            writeln!(f, "  }}")?;
        }
        write!(f, "}}")
    }
}
