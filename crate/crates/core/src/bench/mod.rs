//! End-to-end pipelines (parse, rewrite, plan, execute), cross-engine
//! comparison and report output.

mod gen;
mod oracle;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::inference::{rewrite_to_ucq, SchemaClosure};
use crate::mr::{ExecConfig, MrError, RunStats};
use crate::planner::{self, Engine};
use crate::query::{parse_query, QueryError, Ucq};
use crate::rdf::{parse_ntriples, Graph, ParseMode, RdfError};
use crate::relational::NotApplicable;
use crate::solution::{Row, SolutionSet};

pub use gen::{class_iri, gen_synthetic, instance_iri, property_iri, taxonomy, GenSpec, GEN_NS};
pub use oracle::{oracle_forward_chain, oracle_match};

/// Largest dataset `compare` also checks against the nested-loop oracle.
pub const ORACLE_LIMIT: usize = 10_000;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{stage}: cannot access {}: {source}", path.display())]
    Io {
        stage: &'static str,
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{stage}: {source}")]
    Rdf {
        stage: &'static str,
        source: RdfError,
    },
    #[error("{stage}: {source}")]
    Query {
        stage: &'static str,
        source: QueryError,
    },
    #[error("plan: {0}")]
    Plan(#[from] NotApplicable),
    #[error("execute: {0}")]
    Exec(#[from] MrError),
    #[error(transparent)]
    Mismatch(#[from] MismatchError),
}

/// Two engines returned different answers for the same query and data.
#[derive(Debug, Clone, Error)]
#[error("{engine} disagrees with {reference} on {query}: {} differing rows", rows.len())]
pub struct MismatchError {
    pub query: String,
    pub engine: String,
    pub reference: String,
    /// `true` rows appear only in `engine`'s answer, `false` rows only in the reference.
    pub rows: Vec<(bool, Row)>,
}

fn read(stage: &'static str, path: &Path) -> Result<String, BenchError> {
    fs::read_to_string(path).map_err(|source| BenchError::Io {
        stage,
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), BenchError> {
    fs::write(path, contents).map_err(|source| BenchError::Io {
        stage: "output",
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_graph(stage: &'static str, path: &Path, strict: bool) -> Result<Graph, BenchError> {
    let mode = if strict {
        ParseMode::Strict
    } else {
        ParseMode::Lenient
    };
    let parsed = parse_ntriples(&read(stage, path)?, mode)
        .map_err(|source| BenchError::Rdf { stage, source })?;
    if let Some(first) = parsed.skipped.first() {
        log::warn!(
            "{stage}: skipped {} malformed lines in {}, first: {first}",
            parsed.skipped.len(),
            path.display()
        );
    }
    Ok(parsed.graph)
}

pub fn load_query(path: &Path) -> Result<Ucq, BenchError> {
    parse_query(&read("query", path)?).map_err(|source| BenchError::Query {
        stage: "query",
        source,
    })
}

/// Rewrites `q` against the closure of `schema`.
pub fn rewrite(q: &Ucq, schema: &Graph) -> Result<Ucq, BenchError> {
    rewrite_to_ucq(q, &SchemaClosure::build(schema)).map_err(|source| BenchError::Query {
        stage: "rewrite",
        source,
    })
}

pub fn run_engine(
    q: &Ucq,
    data: &Graph,
    engine: Engine,
    partitions: usize,
    cfg: &ExecConfig,
) -> Result<(SolutionSet, RunStats), BenchError> {
    let mut plan = planner::compile(q, engine, partitions)?;
    Ok(plan.run(data, cfg)?)
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub query: PathBuf,
    pub data: PathBuf,
    pub schema: Option<PathBuf>,
    pub engine: Engine,
    pub inference: bool,
    pub partitions: usize,
    pub strict: bool,
    pub out_dir: Option<PathBuf>,
    pub exec: ExecConfig,
}

/// Runs the full pipeline. The query is rewritten only when inference is
/// on and a schema is given. With an output directory, also writes
/// `results.tsv` and `stats.json` there.
pub fn run(opts: &RunOptions) -> Result<(SolutionSet, RunStats), BenchError> {
    let mut q = load_query(&opts.query)?;
    let data = load_graph("data", &opts.data, opts.strict)?;
    if let (true, Some(p)) = (opts.inference, &opts.schema) {
        q = rewrite(&q, &load_graph("schema", p, opts.strict)?)?;
    }
    let (solutions, stats) = run_engine(&q, &data, opts.engine, opts.partitions, &opts.exec)?;
    if let Some(dir) = &opts.out_dir {
        fs::create_dir_all(dir).map_err(|source| BenchError::Io {
            stage: "output",
            path: dir.clone(),
            source,
        })?;
        write(&dir.join("results.tsv"), &solutions.to_tsv())?;
        write(&dir.join("stats.json"), &stats.to_json())?;
    }
    Ok((solutions, stats))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchRow {
    pub query: String,
    pub engine: String,
    pub jobs: usize,
    pub scans: u64,
    pub shuffle_records: u64,
    pub results: usize,
    pub millis: u128,
}

#[derive(Debug, Clone, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Engines left out of the report, with the reason.
    pub skipped: BTreeMap<String, String>,
    pub stats: BTreeMap<String, RunStats>,
}

pub const CSV_HEADER: &str = "query,engine,jobs,scans,shuffleRecords,results,millis";

impl BenchReport {
    pub fn row(&self, engine: Engine) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.engine == engine.name())
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(Vec::new());
        w.write_record(CSV_HEADER.split(','))
            .expect("in-memory write");
        for r in &self.rows {
            w.serialize(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8 csv")
    }

    /// Stats of every engine run, with `statsVersion` at the top.
    pub fn stats_json(&self) -> String {
        let bundle = serde_json::json!({
            "statsVersion": crate::mr::STATS_VERSION,
            "runs": self.stats,
            "skipped": self.skipped,
        });
        serde_json::to_string_pretty(&bundle).expect("serializable stats")
    }

    pub fn write_to(&self, dir: &Path) -> Result<(), BenchError> {
        fs::create_dir_all(dir).map_err(|source| BenchError::Io {
            stage: "output",
            path: dir.to_path_buf(),
            source,
        })?;
        write(&dir.join("report.csv"), &self.to_csv())?;
        write(&dir.join("stats.json"), &self.stats_json())
    }
}

/// Runs every applicable engine on `q` (rewritten when a schema is given)
/// and fails with [`MismatchError`] unless all answers agree. Small
/// datasets are also checked against the oracle over the materialized graph.
pub fn compare(
    name: &str,
    q: &Ucq,
    data: &Graph,
    schema: Option<&Graph>,
    partitions: usize,
    cfg: &ExecConfig,
) -> Result<BenchReport, BenchError> {
    let rewritten = match schema {
        Some(s) => rewrite(q, s)?,
        None => q.clone(),
    };
    let mut report = BenchReport::default();
    let mut reference: Option<(String, SolutionSet)> = None;
    if data.len() <= ORACLE_LIMIT {
        let g = oracle_forward_chain(data, schema.unwrap_or(&Graph::new()));
        reference = Some(("oracle".into(), oracle_match(q, &g)));
    }
    for engine in Engine::ALL {
        let start = Instant::now();
        let (solutions, stats) = match run_engine(&rewritten, data, engine, partitions, cfg) {
            Err(BenchError::Plan(NotApplicable(reason))) => {
                report.skipped.insert(engine.name().into(), reason);
                continue;
            }
            other => other?,
        };
        let millis = start.elapsed().as_millis();
        match &reference {
            Some((ref_name, expected)) => {
                let rows = solutions.difference(expected);
                if !rows.is_empty() {
                    return Err(MismatchError {
                        query: name.into(),
                        engine: engine.name().into(),
                        reference: ref_name.clone(),
                        rows,
                    }
                    .into());
                }
            }
            None => reference = Some((engine.name().into(), solutions.clone())),
        }
        report.rows.push(BenchRow {
            query: name.into(),
            engine: engine.name().into(),
            jobs: stats.jobs_executed,
            scans: stats.total_scans(),
            shuffle_records: stats.total_shuffle_records(),
            results: solutions.len(),
            millis,
        });
        report.stats.insert(engine.name().into(), stats);
    }
    Ok(report)
}
