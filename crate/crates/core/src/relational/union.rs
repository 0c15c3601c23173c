use std::collections::BTreeSet;
use std::sync::Arc;

use super::{PlanKind, RelRecord, RelationalPlan, SOURCE};
use crate::eval;
use crate::mr::{Handle, Job, Workflow};
use crate::query::{Bindings, StarPattern, Ucq, Var};
use crate::rdf::{Term, Triple};

fn star_job(star: StarPattern, name: String, partitions: usize) -> Job<RelRecord> {
    let map_star = star.clone();
    Job::map_reduce(
        name,
        vec![Handle::Source(SOURCE.into())],
        partitions,
        move |_, r: &RelRecord| match r {
            RelRecord::Triple(t)
                if eval::subject_fits(&map_star, t.subject) && eval::star_admits(&map_star, t) =>
            {
                Ok(vec![(t.subject, *t)])
            }
            _ => Ok(vec![]),
        },
        move |_: &Term, mut triples: Vec<Triple>| {
            eval::sort_group(&mut triples);
            Ok(eval::match_star(&star, &triples, &Bindings::new())
                .into_iter()
                .map(RelRecord::Row)
                .collect())
        },
    )
}

fn join_job(
    left: Handle,
    right: Handle,
    vars: Vec<Var>,
    name: String,
    partitions: usize,
) -> Job<RelRecord> {
    Job::map_reduce(
        name,
        vec![left, right],
        partitions,
        move |side, r: &RelRecord| match r {
            RelRecord::Row(b) => {
                let key: Vec<Term> = vars.iter().map(|v| b[v]).collect();
                Ok(vec![(key, (side, b.clone()))])
            }
            _ => Ok(vec![]),
        },
        |_: &Vec<Term>, values: Vec<(usize, Bindings)>| {
            let (l, r): (Vec<_>, Vec<_>) = values.into_iter().partition(|(s, _)| *s == 0);
            let mut out = Vec::with_capacity(l.len() * r.len());
            for (_, a) in &l {
                for (_, b) in &r {
                    let mut row = a.clone();
                    row.extend(b.iter().map(|(k, v)| (k.clone(), *v)));
                    out.push(RelRecord::Row(row));
                }
            }
            Ok(out)
        },
    )
}

/// Builds the union plan: per branch, one job per star keyed on subject and
/// one job per inter-star join, then a map-only merge of all branches.
pub fn compile_union(q: &Ucq, partitions: usize) -> RelationalPlan {
    let mut workflow = Workflow::new();
    let mut branch_map = Vec::new();
    let mut finals = Vec::new();
    for (b, branch) in q.branches.iter().enumerate() {
        let mut star_outputs = Vec::new();
        for (s, star) in branch.stars.iter().enumerate() {
            star_outputs.push(workflow.add_job(star_job(
                star.clone(),
                format!("branch {b} star {s} scan+group"),
                partitions,
            )));
            branch_map.push(Some(b));
        }
        let mut acc = star_outputs[0].clone();
        let mut acc_vars: BTreeSet<Var> = branch.stars[0].vars();
        for (s, out) in star_outputs.iter().enumerate().skip(1) {
            let sv = branch.stars[s].vars();
            let vars: Vec<Var> = sv.intersection(&acc_vars).cloned().collect();
            acc = workflow.add_job(join_job(
                acc,
                out.clone(),
                vars,
                format!("branch {b} join star {s}"),
                partitions,
            ));
            acc_vars.extend(sv);
            branch_map.push(Some(b));
        }
        finals.push(acc);
    }
    let q_merge = Arc::new(q.clone());
    workflow.add_job(Job::map_only(
        "union merge",
        finals,
        move |input, r| match r {
            RelRecord::Row(b) => Ok(q_merge.branches[input]
                .finish(b.clone())
                .map(|row| RelRecord::Solution(q_merge.project(&row)))
                .into_iter()
                .collect()),
            _ => Ok(vec![]),
        },
    ));
    branch_map.push(None);
    RelationalPlan {
        kind: PlanKind::Union,
        workflow,
        branch_map,
        projection: q.projection.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mr::ExecConfig;
    use crate::query::parse_query;
    use crate::rdf::Graph;
    use crate::relational::source_records;

    fn ex(s: &str) -> Term {
        Term::iri(&format!("http://ex.org/{s}"))
    }

    #[test]
    fn job_counts_follow_the_formula() {
        let q = parse_query(
            "PREFIX e: <http://ex.org/> SELECT * { { ?a e:p ?b . ?b e:q ?c . ?c e:r ?d } UNION { ?a e:s ?b } }",
        )
        .unwrap();
        let g: Graph = [
            Triple::from_parts(ex("a"), ex("p"), ex("b")),
            Triple::from_parts(ex("b"), ex("q"), ex("c")),
            Triple::from_parts(ex("c"), ex("r"), ex("d")),
            Triple::from_parts(ex("x"), ex("s"), ex("y")),
        ]
        .into_iter()
        .collect();
        let mut plan = compile_union(&q, 3);
        let (sol, stats) = plan
            .run(source_records(&g), &ExecConfig::default())
            .unwrap();
        assert_eq!(stats.jobs_executed, 5 + 1 + 1);
        assert_eq!(stats.total_scans(), 4);
        assert_eq!(sol.len(), 2);
    }
}
