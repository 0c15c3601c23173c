//! Compiles a UCQ for one of the three engines and predicts the resulting
//! workflow length and number of source scans without running it.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::Serialize;

use crate::mr::{ExecConfig, Handle, MrError, RunStats, Workflow};
use crate::ntga::{self, NtgaPlan};
use crate::query::Ucq;
use crate::rdf::Graph;
use crate::relational::{self, NotApplicable, RelationalPlan};
use crate::solution::SolutionSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Ntga,
    RelationalUnion,
    RelationalMqo,
}

impl Engine {
    pub const ALL: [Engine; 3] = [Engine::Ntga, Engine::RelationalUnion, Engine::RelationalMqo];

    pub fn name(self) -> &'static str {
        match self {
            Engine::Ntga => "ntga",
            Engine::RelationalUnion => "relational-union",
            Engine::RelationalMqo => "relational-mqo",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Engine, String> {
        match s {
            "ntga" => Ok(Engine::Ntga),
            "relational-union" | "union" => Ok(Engine::RelationalUnion),
            "relational-mqo" | "mqo" => Ok(Engine::RelationalMqo),
            other => Err(format!("unknown engine `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PlanChoice {
    pub engine: Engine,
    pub predicted_jobs: usize,
    pub predicted_source_scans: usize,
}

/// Closed-form (jobs, source scans) for `engine` on `q`.
///
/// * ntga: one grouping job plus one job per grouped join round, one scan.
/// * union: `Σ(2n_b − 1) + 1` jobs, one scan per star.
/// * mqo: root scan, one job per optional group, filter; one scan.
pub fn predict_job_count(q: &Ucq, engine: Engine) -> Result<(usize, usize), NotApplicable> {
    Ok(match engine {
        Engine::Ntga => (1 + ntga::join_rounds(q).len(), 1),
        Engine::RelationalUnion => {
            let jobs: usize = q.branches.iter().map(|b| 2 * b.stars.len() - 1).sum();
            let scans = q.branches.iter().map(|b| b.stars.len()).sum();
            (jobs + 1, scans)
        }
        Engine::RelationalMqo => (relational::build_mqo_plan(q)?.predicted_jobs(), 1),
    })
}

pub fn plan_choice(q: &Ucq, engine: Engine) -> Result<PlanChoice, NotApplicable> {
    let (predicted_jobs, predicted_source_scans) = predict_job_count(q, engine)?;
    Ok(PlanChoice {
        engine,
        predicted_jobs,
        predicted_source_scans,
    })
}

pub enum CompiledPlan {
    Ntga(NtgaPlan),
    Relational(RelationalPlan),
}

pub fn plan_ntga(q: &Ucq, partitions: usize) -> CompiledPlan {
    CompiledPlan::Ntga(ntga::compile(q, partitions))
}

pub fn plan_relational(
    q: &Ucq,
    engine: Engine,
    partitions: usize,
) -> Result<CompiledPlan, NotApplicable> {
    match engine {
        Engine::RelationalMqo => {
            let plan = relational::build_mqo_plan(q)?;
            Ok(CompiledPlan::Relational(relational::compile_mqo(
                &plan, partitions,
            )))
        }
        _ => Ok(CompiledPlan::Relational(relational::compile_union(
            q, partitions,
        ))),
    }
}

pub fn compile(q: &Ucq, engine: Engine, partitions: usize) -> Result<CompiledPlan, NotApplicable> {
    match engine {
        Engine::Ntga => Ok(plan_ntga(q, partitions)),
        _ => plan_relational(q, engine, partitions),
    }
}

fn describe_workflow<R: Send + Sync + 'static>(title: &str, w: &Workflow<R>) -> String {
    let mut out = format!("{title} ({} jobs)\n", w.jobs.len());
    for (i, job) in w.jobs.iter().enumerate() {
        let inputs: Vec<String> = job
            .inputs
            .iter()
            .map(|h| match h {
                Handle::Source(s) => format!("source:{s}"),
                Handle::Job(j) => format!("job{j}"),
            })
            .collect();
        let kind = if job.is_map_only() {
            "map-only".to_string()
        } else {
            format!("map-reduce, {} partitions", job.partitions)
        };
        let _ = writeln!(out, "  job{i}: {} [{kind}]", job.name);
        let _ = writeln!(out, "    inputs: {}", inputs.join(", "));
    }
    out
}

impl CompiledPlan {
    pub fn job_count(&self) -> usize {
        match self {
            CompiledPlan::Ntga(p) => p.workflow.jobs.len(),
            CompiledPlan::Relational(p) => p.workflow.jobs.len(),
        }
    }

    /// The workflow as indented text, one job per entry.
    pub fn describe(&self) -> String {
        match self {
            CompiledPlan::Ntga(p) => describe_workflow("ntga", &p.workflow),
            CompiledPlan::Relational(p) => {
                let title = match p.kind {
                    relational::PlanKind::Union => "relational-union",
                    relational::PlanKind::Mqo => "relational-mqo",
                };
                describe_workflow(title, &p.workflow)
            }
        }
    }

    pub fn run(
        &mut self,
        data: &Graph,
        cfg: &ExecConfig,
    ) -> Result<(SolutionSet, RunStats), MrError> {
        match self {
            CompiledPlan::Ntga(p) => p.run(ntga::source_records(data), cfg),
            CompiledPlan::Relational(p) => p.run(relational::source_records(data), cfg),
        }
    }
}
