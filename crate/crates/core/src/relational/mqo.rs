use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use super::{PlanKind, RelRecord, RelationalPlan, SOURCE};
use crate::eval;
use crate::mr::{Handle, Job, Workflow};
use crate::query::{
    Bindings, GraphPattern, OptionalQuery, PatternTerm, StarPattern, TriplePattern, Ucq, Var,
};
use crate::rdf::{Term, Triple};
use crate::solution::Row;

/// Why a query has no multi-query plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NotApplicable(pub String);

impl fmt::Display for NotApplicable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "multi-query plan not applicable: {}", self.0)
    }
}

impl std::error::Error for NotApplicable {}

/// A root pattern shared by every branch plus each branch's residual.
///
/// Root patterns are matched across branches modulo renaming of variables
/// that are not projected, so `renames[b]` maps root variables to the
/// variables of branch `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MqoPlan {
    pub subject: PatternTerm,
    pub root: Vec<TriplePattern>,
    pub residuals: Vec<Vec<TriplePattern>>,
    pub renames: Vec<BTreeMap<Var, Var>>,
    /// Branches whose residuals are left-outer-joined in the same job.
    pub groups: Vec<Vec<usize>>,
    pub branches: Vec<GraphPattern>,
    pub projection: Vec<Var>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Shape {
    Term(PatternTerm),
    Any,
}

fn shape(p: &TriplePattern, projected: &BTreeSet<Var>) -> [Shape; 3] {
    let s = |t: &PatternTerm| match t {
        PatternTerm::Var(v) if !projected.contains(v) => Shape::Any,
        other => Shape::Term(other.clone()),
    };
    [Shape::Term(p.subject.clone()), s(&p.property), s(&p.object)]
}

type ShapeCounts = BTreeMap<[Shape; 3], usize>;

fn star_shapes(star: &StarPattern, projected: &BTreeSet<Var>) -> ShapeCounts {
    let mut m = ShapeCounts::new();
    for p in &star.patterns {
        *m.entry(shape(p, projected)).or_default() += 1;
    }
    m
}

/// Picks, per shape occurrence, the first unused pattern of `star`.
fn pick(
    star: &StarPattern,
    wanted: &ShapeCounts,
    projected: &BTreeSet<Var>,
) -> (Vec<TriplePattern>, Vec<TriplePattern>) {
    let mut left = wanted.clone();
    let mut chosen: Vec<([Shape; 3], TriplePattern)> = Vec::new();
    let mut rest = Vec::new();
    for p in &star.patterns {
        let sh = shape(p, projected);
        match left.get_mut(&sh) {
            Some(n) if *n > 0 => {
                *n -= 1;
                chosen.push((sh, p.clone()));
            }
            _ => rest.push(p.clone()),
        }
    }
    chosen.sort_by(|a, b| a.0.cmp(&b.0));
    (chosen.into_iter().map(|(_, p)| p).collect(), rest)
}

/// Finds the largest star subpattern common to all branches.
pub fn build_mqo_plan(q: &Ucq) -> Result<MqoPlan, NotApplicable> {
    let projected: BTreeSet<Var> = q.projection.iter().cloned().collect();
    let Some(first) = q.branches.first() else {
        return Err(NotApplicable("the union has no branches".into()));
    };
    let mut best: Option<(usize, String, PatternTerm, ShapeCounts)> = None;
    for star in &first.stars {
        let mut common = star_shapes(star, &projected);
        for b in &q.branches[1..] {
            let other = b
                .stars
                .iter()
                .find(|s| s.subject == star.subject)
                .map(|s| star_shapes(s, &projected))
                .unwrap_or_default();
            common = common
                .into_iter()
                .filter_map(|(k, n)| other.get(&k).map(|m| (k, n.min(*m))))
                .collect();
        }
        let size: usize = common.values().sum();
        let name = star.subject.to_string();
        let better = match &best {
            None => size > 0,
            Some((bs, bn, _, _)) => size > *bs || (size == *bs && name < *bn),
        };
        if better {
            best = Some((size, name, star.subject.clone(), common));
        }
    }
    let Some((_, _, subject, common)) = best else {
        return Err(NotApplicable(
            "no common subexpression across branches".into(),
        ));
    };

    let mut root = Vec::new();
    let mut residuals = Vec::new();
    let mut renames = Vec::new();
    for (b, branch) in q.branches.iter().enumerate() {
        let star = branch.stars.iter().find(|s| s.subject == subject).unwrap();
        let (chosen, mut rest) = pick(star, &common, &projected);
        for other in branch.stars.iter().filter(|s| s.subject != subject) {
            rest.extend(other.patterns.iter().cloned());
        }
        if rest.iter().any(|p| p.subject != subject) {
            return Err(NotApplicable(format!(
                "branch {b} has patterns outside the common star"
            )));
        }
        if b == 0 {
            root = chosen.clone();
        }
        let mut rename = BTreeMap::new();
        for (r, p) in root.iter().zip(&chosen) {
            for (rt, pt) in r.positions().into_iter().zip(p.positions()) {
                if let (PatternTerm::Var(rv), PatternTerm::Var(pv)) = (rt, pt) {
                    if rename
                        .insert(rv.clone(), pv.clone())
                        .is_some_and(|old| old != *pv)
                    {
                        return Err(NotApplicable(format!(
                            "branch {b} joins the common star differently"
                        )));
                    }
                }
            }
        }
        residuals.push(rest);
        renames.push(rename);
    }
    let mut by_size: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (b, r) in residuals.iter().enumerate() {
        if !r.is_empty() {
            by_size.entry(r.len()).or_default().push(b);
        }
    }
    Ok(MqoPlan {
        subject,
        root,
        residuals,
        renames,
        groups: by_size.into_values().collect(),
        branches: q.branches.clone(),
        projection: q.projection.clone(),
    })
}

impl MqoPlan {
    /// A plan written directly as a root pattern with OPTIONAL groups; each
    /// OPTIONAL group is one branch.
    pub fn from_optional_query(oq: &OptionalQuery) -> Result<MqoPlan, NotApplicable> {
        let subject = oq.root[0].subject.clone();
        if oq
            .root
            .iter()
            .chain(oq.optionals.iter().flatten())
            .any(|p| p.subject != subject)
        {
            return Err(NotApplicable("patterns outside the root star".into()));
        }
        let residuals: Vec<Vec<TriplePattern>> = if oq.optionals.is_empty() {
            vec![Vec::new()]
        } else {
            oq.optionals.clone()
        };
        let branches = residuals
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut ps = oq.root.clone();
                ps.extend(r.iter().cloned());
                GraphPattern::from_patterns(i, ps)
            })
            .collect();
        let identity: BTreeMap<Var, Var> = oq
            .root
            .iter()
            .flat_map(|p| p.vars().cloned())
            .map(|v| (v.clone(), v))
            .collect();
        let mut by_size: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (b, r) in residuals.iter().enumerate() {
            if !r.is_empty() {
                by_size.entry(r.len()).or_default().push(b);
            }
        }
        Ok(MqoPlan {
            subject,
            root: oq.root.clone(),
            renames: vec![identity; residuals.len()],
            residuals,
            groups: by_size.into_values().collect(),
            branches,
            projection: oq.projection.clone(),
        })
    }

    pub fn predicted_jobs(&self) -> usize {
        self.groups.len() + 2
    }

    fn root_star(&self) -> StarPattern {
        StarPattern::new(0, self.subject.clone(), self.root.clone())
    }

    fn residual_star(&self, b: usize) -> StarPattern {
        StarPattern::new(0, self.subject.clone(), self.residuals[b].clone())
    }

    /// Root bindings expressed in branch `b`'s variables; `None` when two
    /// root variables renamed to one branch variable disagree.
    fn renamed(&self, b: usize, root: &Bindings) -> Option<Bindings> {
        let mut out = Bindings::new();
        for (v, t) in root {
            let target = self.renames[b].get(v).cloned().unwrap_or_else(|| v.clone());
            if out.insert(target, *t).is_some_and(|old| old != *t) {
                return None;
            }
        }
        Some(out)
    }

    fn finish(&self, b: usize, row: Bindings) -> Option<Row> {
        self.branches[b]
            .finish(row)
            .map(|r| self.projection.iter().map(|v| r.get(v).copied()).collect())
    }
}

fn scan_job(plan: Arc<MqoPlan>, partitions: usize) -> Job<RelRecord> {
    let root = Arc::new(plan.root_star());
    let residuals: Arc<Vec<StarPattern>> = Arc::new(
        (0..plan.residuals.len())
            .filter(|&b| !plan.residuals[b].is_empty())
            .map(|b| plan.residual_star(b))
            .collect(),
    );
    let (map_root, map_res) = (root.clone(), residuals.clone());
    Job::map_reduce(
        "root scan+group",
        vec![Handle::Source(SOURCE.into())],
        partitions,
        move |_, r: &RelRecord| match r {
            RelRecord::Triple(t)
                if eval::subject_fits(&map_root, t.subject)
                    && (eval::star_admits(&map_root, t)
                        || map_res.iter().any(|s| eval::star_admits(s, t))) =>
            {
                Ok(vec![(t.subject, *t)])
            }
            _ => Ok(vec![]),
        },
        move |subject: &Term, mut triples: Vec<Triple>| {
            eval::sort_group(&mut triples);
            let mut out: Vec<RelRecord> = eval::match_star(&root, &triples, &Bindings::new())
                .into_iter()
                .map(|b| RelRecord::Root {
                    subject: *subject,
                    root: b,
                    optional: BTreeMap::new(),
                })
                .collect();
            let res: Vec<Triple> = triples
                .into_iter()
                .filter(|t| residuals.iter().any(|s| eval::star_admits(s, t)))
                .collect();
            if !res.is_empty() {
                out.push(RelRecord::Residual {
                    subject: *subject,
                    triples: res,
                });
            }
            Ok(out)
        },
    )
}

fn loj_job(
    plan: Arc<MqoPlan>,
    group: Vec<usize>,
    rows: Handle,
    scan: Handle,
    partitions: usize,
) -> Job<RelRecord> {
    let single_input = rows == scan;
    let inputs = if single_input {
        vec![rows]
    } else {
        vec![rows, scan]
    };
    let name = format!(
        "left outer join of {} optional branch{}",
        group.len(),
        if group.len() == 1 { "" } else { "es" }
    );
    let stars: Vec<(usize, StarPattern)> =
        group.iter().map(|&b| (b, plan.residual_star(b))).collect();
    Job::map_reduce(
        name,
        inputs,
        partitions,
        move |input, r: &RelRecord| match r {
            RelRecord::Root { subject, .. } if input == 0 => Ok(vec![(*subject, r.clone())]),
            RelRecord::Residual { subject, .. } if single_input || input == 1 => {
                Ok(vec![(*subject, r.clone())])
            }
            _ => Ok(vec![]),
        },
        move |_: &Term, values: Vec<RelRecord>| {
            let mut residual: Vec<Triple> = Vec::new();
            let mut rows = Vec::new();
            for v in values {
                match v {
                    RelRecord::Residual { triples, .. } => residual.extend(triples),
                    other => rows.push(other),
                }
            }
            eval::sort_group(&mut residual);
            for row in &mut rows {
                if let RelRecord::Root { root, optional, .. } = row {
                    for (b, star) in &stars {
                        let Some(seed) = plan.renamed(*b, root) else {
                            continue;
                        };
                        let matches = eval::match_star(star, &residual, &seed);
                        if !matches.is_empty() {
                            optional.insert(*b, matches);
                        }
                    }
                }
            }
            Ok(rows)
        },
    )
}

fn filter_job(plan: Arc<MqoPlan>, input: Handle, partitions: usize) -> Job<RelRecord> {
    Job::map_reduce(
        "false-positive filter",
        vec![input],
        partitions,
        move |_, r: &RelRecord| {
            let RelRecord::Root { root, optional, .. } = r else {
                return Ok(vec![]);
            };
            let mut out: Vec<(Row, u8)> = Vec::new();
            for b in 0..plan.branches.len() {
                if plan.residuals[b].is_empty() {
                    if let Some(row) = plan.renamed(b, root).and_then(|s| plan.finish(b, s)) {
                        out.push((row, 0));
                    }
                } else {
                    for m in optional.get(&b).into_iter().flatten() {
                        out.extend(plan.finish(b, m.clone()).map(|row| (row, 0)));
                    }
                }
            }
            Ok(out)
        },
        |row: &Row, _: Vec<u8>| Ok(vec![RelRecord::Solution(row.clone())]),
    )
}

/// Builds the MQO workflow: one scan of the source for the root and the
/// residual triples, one left-outer-join job per residual group, and a
/// filter job that keeps rows with at least one matching branch.
pub fn compile_mqo(plan: &MqoPlan, partitions: usize) -> RelationalPlan {
    let plan = Arc::new(plan.clone());
    let mut workflow = Workflow::new();
    let scan = workflow.add_job(scan_job(plan.clone(), partitions));
    let mut rows = scan.clone();
    for g in &plan.groups {
        rows = workflow.add_job(loj_job(
            plan.clone(),
            g.clone(),
            rows,
            scan.clone(),
            partitions,
        ));
    }
    workflow.add_job(filter_job(plan.clone(), rows, partitions));
    RelationalPlan {
        kind: PlanKind::Mqo,
        branch_map: vec![None; workflow.jobs.len()],
        workflow,
        projection: plan.projection.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mr::ExecConfig;
    use crate::query::{parse_optional_query, parse_query};
    use crate::rdf::Graph;
    use crate::relational::source_records;

    fn ex(s: &str) -> Term {
        Term::iri(&format!("http://ex.org/{s}"))
    }

    #[test]
    fn shared_root_and_false_positive_filter() {
        let q = parse_query(
            "PREFIX e: <http://ex.org/> SELECT ?s ?n { { ?s e:name ?n . ?s e:type e:A } UNION { ?s e:name ?n . ?s e:type e:B } }",
        )
        .unwrap();
        let plan = build_mqo_plan(&q).unwrap();
        assert_eq!(plan.root.len(), 1);
        assert_eq!(plan.groups.len(), 1);
        let g: Graph = [
            Triple::from_parts(ex("1"), ex("name"), Term::literal("one")),
            Triple::from_parts(ex("1"), ex("type"), ex("A")),
            Triple::from_parts(ex("2"), ex("name"), Term::literal("two")),
            Triple::from_parts(ex("2"), ex("type"), ex("C")),
        ]
        .into_iter()
        .collect();
        let (sol, stats) = compile_mqo(&plan, 2)
            .run(source_records(&g), &ExecConfig::default())
            .unwrap();
        assert_eq!(sol.len(), 1);
        assert_eq!(stats.jobs_executed, 3);
        assert_eq!(stats.total_scans(), 1);
    }

    #[test]
    fn identical_branches_have_empty_optionals() {
        let q = parse_query(
            "SELECT * { { ?s <http://ex.org/p> ?o } UNION { ?s <http://ex.org/p> ?o } }",
        )
        .unwrap();
        let plan = build_mqo_plan(&q).unwrap();
        assert!(plan.residuals.iter().all(Vec::is_empty));
        assert_eq!(plan.predicted_jobs(), 2);
    }

    #[test]
    fn renaming_of_hidden_variables() {
        let q = parse_query(
            "PREFIX e: <http://ex.org/> SELECT ?s { { ?s e:name ?a . ?s e:p ?x } UNION { ?s e:name ?b . ?s e:q ?y } }",
        )
        .unwrap();
        let plan = build_mqo_plan(&q).unwrap();
        assert_eq!(plan.root.len(), 1);
        assert_eq!(plan.renames[1][&Var::new("a")], Var::new("b"));
    }

    #[test]
    fn disjoint_branches_are_not_applicable() {
        let q = parse_query(
            "PREFIX e: <http://ex.org/> SELECT * { { ?s e:p ?o . ?o e:q ?z } UNION { ?s e:r ?o } }",
        )
        .unwrap();
        assert!(build_mqo_plan(&q).is_err());
    }

    #[test]
    fn optional_query_input() {
        let oq = parse_optional_query(
            "PREFIX e: <http://ex.org/> SELECT ?s { ?s e:name ?n OPTIONAL { ?s e:type e:A } }",
        )
        .unwrap();
        let plan = MqoPlan::from_optional_query(&oq).unwrap();
        assert_eq!(plan.predicted_jobs(), 3);
    }
}
