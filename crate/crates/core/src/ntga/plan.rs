use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ops::{join_one, key_vars, left_keys, right_keys, LoadFilter};
use super::{DisjunctiveStarFilter, NestedTripleGroup, TripleGroup};
use crate::eval;
use crate::mr::{ExecConfig, Handle, Job, MrError, RunStats, Workflow};
use crate::query::{Bindings, Ucq, Var};
use crate::rdf::{Graph, Term, Triple};
use crate::solution::{Row, SolutionSet};

pub const SOURCE: &str = "triples";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum NtgaRecord {
    Triple(Triple),
    Group(TripleGroup),
    /// A branch matched up to (excluding) star `next`.
    Partial {
        branch: usize,
        next: usize,
        ntg: NestedTripleGroup,
    },
    Solution(Row),
}

/// Joins executed together in one job: every listed branch joins its next
/// star on the same variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JoinRound {
    pub key_vars: Vec<Var>,
    /// (branch, index of the star being joined)
    pub joins: Vec<(usize, usize)>,
}

/// Greedy grouping of the left-deep joins of all multi-star branches. Each
/// round takes the join variables shared by the most branches' next join
/// (ties broken by variable order) and advances those branches by one star.
pub fn join_rounds(q: &Ucq) -> Vec<JoinRound> {
    let mut next: BTreeMap<usize, usize> = q
        .branches
        .iter()
        .enumerate()
        .filter(|(_, b)| b.stars.len() > 1)
        .map(|(i, _)| (i, 1))
        .collect();
    let mut rounds = Vec::new();
    while !next.is_empty() {
        let mut by_key: BTreeMap<Vec<Var>, Vec<(usize, usize)>> = BTreeMap::new();
        for (&b, &s) in &next {
            let left: BTreeSet<usize> = (0..s).collect();
            by_key
                .entry(key_vars(&q.branches[b], &left, s))
                .or_default()
                .push((b, s));
        }
        let (key_vars, joins) = by_key
            .into_iter()
            .fold(
                None::<(Vec<Var>, Vec<(usize, usize)>)>,
                |best, cand| match best {
                    Some(b) if b.1.len() >= cand.1.len() => Some(b),
                    _ => Some(cand),
                },
            )
            .expect("pending joins");
        for &(b, s) in &joins {
            if s + 1 == q.branches[b].stars.len() {
                next.remove(&b);
            } else {
                next.insert(b, s + 1);
            }
        }
        rounds.push(JoinRound { key_vars, joins });
    }
    rounds
}

#[derive(Debug, Clone, Serialize, Deserialize)]
enum JoinValue {
    Left {
        branch: usize,
        ntg: NestedTripleGroup,
    },
    Right {
        group: TripleGroup,
        branches: Vec<usize>,
    },
}

struct Shared {
    q: Ucq,
    filter: DisjunctiveStarFilter,
    load: LoadFilter,
    /// Alternatives of stars in branches that need joins.
    join_alts: BTreeSet<usize>,
}

impl Shared {
    fn alt(&self, branch: usize, star: usize) -> usize {
        self.filter.star_alt[&(branch, star)]
    }

    fn solution(&self, branch: usize, row: Bindings) -> Option<Row> {
        let b = &self.q.branches[branch];
        b.finish(row).map(|r| self.q.project(&r))
    }
}

/// A compiled NTGA workflow awaiting its source dataset.
pub struct NtgaPlan {
    pub workflow: Workflow<NtgaRecord>,
    pub rounds: Vec<JoinRound>,
    pub projection: Vec<Var>,
}

impl NtgaPlan {
    pub fn predicted_jobs(&self) -> usize {
        1 + self.rounds.len()
    }

    pub fn run(
        &mut self,
        data: Arc<Vec<NtgaRecord>>,
        cfg: &ExecConfig,
    ) -> Result<(SolutionSet, RunStats), MrError> {
        self.workflow.add_source(SOURCE, data);
        let result = self.workflow.run(cfg)?;
        let mut solutions = SolutionSet::new(self.projection.clone());
        for out in &result.outputs {
            for r in out.iter() {
                if let NtgaRecord::Solution(row) = r {
                    solutions.insert(row.clone());
                }
            }
        }
        Ok((solutions, result.stats))
    }
}

fn first_job(shared: Arc<Shared>, partitions: usize) -> Job<NtgaRecord> {
    let map_shared = shared.clone();
    Job::map_reduce(
        "TG_LoadFilter+TG_GroupBy+TG_GroupFilter",
        vec![Handle::Source(SOURCE.into())],
        partitions,
        move |_, r: &NtgaRecord| match r {
            NtgaRecord::Triple(t) if map_shared.load.keeps(t) => Ok(vec![(t.subject, *t)]),
            _ => Ok(vec![]),
        },
        move |subject: &Term, triples: Vec<Triple>| {
            let g = TripleGroup::new(*subject, triples);
            let tags = shared.filter.tags(&g);
            let mut out = Vec::new();
            for (b, branch) in shared.q.branches.iter().enumerate() {
                if branch.stars.len() == 1 && tags.contains(&shared.alt(b, 0)) {
                    for row in eval::match_star(&branch.stars[0], &g.triples, &Bindings::new()) {
                        out.extend(shared.solution(b, row).map(NtgaRecord::Solution));
                    }
                }
            }
            let join_tags: BTreeSet<usize> =
                tags.intersection(&shared.join_alts).copied().collect();
            if !join_tags.is_empty() {
                let stars = join_tags
                    .iter()
                    .map(|&a| &shared.filter.alternatives[a].star);
                let mut trimmed = g.trimmed(stars);
                trimmed.match_tags = join_tags;
                out.push(NtgaRecord::Group(trimmed));
            }
            Ok(out)
        },
    )
}

fn join_job(
    shared: Arc<Shared>,
    round: JoinRound,
    index: usize,
    partitions: usize,
) -> Job<NtgaRecord> {
    let inputs = (0..index).map(Handle::Job).collect();
    let joins: BTreeMap<usize, usize> = round.joins.iter().copied().collect();
    let vars = round.key_vars.clone();
    let map_shared = shared.clone();
    let map_joins = joins.clone();
    let name = format!(
        "TG_UJoin on {} ({} branch{})",
        if vars.is_empty() {
            "()".to_string()
        } else {
            vars.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",")
        },
        joins.len(),
        if joins.len() == 1 { "" } else { "es" }
    );
    Job::map_reduce(
        name,
        inputs,
        partitions,
        move |_, r: &NtgaRecord| {
            let s = &map_shared;
            let mut out: Vec<(Vec<Term>, JoinValue)> = Vec::new();
            match r {
                NtgaRecord::Group(g) => {
                    let mut right: BTreeMap<Vec<Term>, Vec<usize>> = BTreeMap::new();
                    for (&b, &star) in &map_joins {
                        let branch = &s.q.branches[b];
                        if star == 1 && g.match_tags.contains(&s.alt(b, 0)) {
                            let ntg = NestedTripleGroup::leaf(0, g.clone());
                            for k in left_keys(&ntg, branch, &vars) {
                                out.push((
                                    k,
                                    JoinValue::Left {
                                        branch: b,
                                        ntg: ntg.clone(),
                                    },
                                ));
                            }
                        }
                        if g.match_tags.contains(&s.alt(b, star)) {
                            for k in right_keys(g, branch, star, &vars) {
                                right.entry(k).or_default().push(b);
                            }
                        }
                    }
                    for (k, branches) in right {
                        out.push((
                            k,
                            JoinValue::Right {
                                group: g.clone(),
                                branches,
                            },
                        ));
                    }
                }
                NtgaRecord::Partial { branch, next, ntg }
                    if map_joins.get(branch) == Some(next) =>
                {
                    for k in left_keys(ntg, &s.q.branches[*branch], &vars) {
                        out.push((
                            k,
                            JoinValue::Left {
                                branch: *branch,
                                ntg: ntg.clone(),
                            },
                        ));
                    }
                }
                _ => {}
            }
            Ok(out)
        },
        move |key: &Vec<Term>, values: Vec<JoinValue>| {
            let s = &shared;
            let mut lefts: BTreeMap<usize, Vec<NestedTripleGroup>> = BTreeMap::new();
            let mut rights: Vec<(TripleGroup, Vec<usize>)> = Vec::new();
            for v in values {
                match v {
                    JoinValue::Left { branch, ntg } => lefts.entry(branch).or_default().push(ntg),
                    JoinValue::Right { group, branches } => rights.push((group, branches)),
                }
            }
            let mut out = Vec::new();
            for (group, branches) in &rights {
                for b in branches {
                    let star = joins[b];
                    let branch = &s.q.branches[*b];
                    let last = star + 1 == branch.stars.len();
                    for l in lefts.get(b).into_iter().flatten() {
                        let joined = join_one(l, group, branch, star, &round.key_vars, key);
                        if last {
                            for row in super::flatten(&joined, branch) {
                                out.extend(s.solution(*b, row).map(NtgaRecord::Solution));
                            }
                        } else {
                            out.push(NtgaRecord::Partial {
                                branch: *b,
                                next: star + 1,
                                ntg: joined,
                            });
                        }
                    }
                }
            }
            Ok(out)
        },
    )
}

/// Builds the NTGA workflow: one grouping job for every star of every
/// branch, then one job per join round.
pub fn compile(q: &Ucq, partitions: usize) -> NtgaPlan {
    let filter = DisjunctiveStarFilter::from_ucq(q);
    let load = LoadFilter::from_filter(&filter);
    let join_alts = filter
        .star_alt
        .iter()
        .filter(|((b, _), _)| q.branches[*b].stars.len() > 1)
        .map(|(_, a)| *a)
        .collect();
    let shared = Arc::new(Shared {
        q: q.clone(),
        filter,
        load,
        join_alts,
    });
    let rounds = join_rounds(q);
    let mut workflow = Workflow::new();
    workflow.add_job(first_job(shared.clone(), partitions));
    for (i, r) in rounds.iter().enumerate() {
        workflow.add_job(join_job(shared.clone(), r.clone(), i + 1, partitions));
    }
    NtgaPlan {
        workflow,
        rounds,
        projection: q.projection.clone(),
    }
}

pub fn source_records(data: &Graph) -> Arc<Vec<NtgaRecord>> {
    Arc::new(data.iter().map(|t| NtgaRecord::Triple(*t)).collect())
}

/// Compiles and runs `q` over `data`.
pub fn execute(
    q: &Ucq,
    data: &Graph,
    partitions: usize,
    cfg: &ExecConfig,
) -> Result<(SolutionSet, RunStats), MrError> {
    compile(q, partitions).run(source_records(data), cfg)
}
