//! In-process map-shuffle-reduce runtime with job, scan and record counters.
//!
//! A [`Workflow`] is an ordered list of [`Job`]s over named source datasets.
//! Each job reads source datasets or the outputs of earlier jobs, runs its
//! map function on every record, and (unless map-only) hash-partitions the
//! emitted pairs, sorts each partition by key and applies the reduce function
//! per key. Parallel and sequential execution produce identical outputs.

mod partition;
mod stats;

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, BufWriter, Seek, SeekFrom, Write};
use std::marker::PhantomData;
use std::sync::Arc;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

pub use partition::{fnv1a, partition_of, PartitionKey, DEFAULT_SEED};
pub use stats::{JobStats, RunStats, STATS_VERSION};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MrError {
    #[error("job {job}: unresolved input {handle}")]
    UnresolvedInput { job: usize, handle: String },
    #[error("job {job} ({name}): {message}")]
    UserFunction {
        job: usize,
        name: String,
        message: String,
    },
    #[error("job {job}: partitions must be positive")]
    ZeroPartitions { job: usize },
    #[error("job {job}: spill failed: {message}")]
    Spill { job: usize, message: String },
}

/// A dataset a job reads.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Handle {
    Source(String),
    Job(usize),
}

impl std::fmt::Display for Handle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Handle::Source(s) => write!(f, "source:{s}"),
            Handle::Job(j) => write!(f, "job:{j}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecConfig {
    pub parallel: bool,
    /// Shuffles with more records than this go through temporary files.
    pub spill_threshold: Option<usize>,
    pub seed: u64,
}

impl Default for ExecConfig {
    fn default() -> Self {
        ExecConfig {
            parallel: true,
            spill_threshold: None,
            seed: DEFAULT_SEED,
        }
    }
}

impl ExecConfig {
    pub fn sequential() -> Self {
        ExecConfig {
            parallel: false,
            ..ExecConfig::default()
        }
    }
}

#[derive(Debug, Default)]
struct PhaseCounts {
    shuffle: u64,
    reduce_out: u64,
}

trait Phases<R>: Send + Sync {
    fn run(
        &self,
        inputs: &[&[R]],
        partitions: usize,
        cfg: &ExecConfig,
    ) -> Result<(Vec<R>, PhaseCounts), PhaseError>;
}

enum PhaseError {
    User(String),
    Spill(String),
}

fn map_all<R, T, F>(inputs: &[&[R]], parallel: bool, f: &F) -> Result<Vec<T>, PhaseError>
where
    R: Sync,
    T: Send,
    F: Fn(usize, &R) -> Result<Vec<T>, String> + Sync,
{
    let mut out = Vec::new();
    for (i, records) in inputs.iter().enumerate() {
        let chunks: Vec<Result<Vec<T>, String>> = if parallel {
            records.par_iter().map(|r| f(i, r)).collect()
        } else {
            records.iter().map(|r| f(i, r)).collect()
        };
        for c in chunks {
            out.extend(c.map_err(PhaseError::User)?);
        }
    }
    Ok(out)
}

struct MapOnly<R, F> {
    map: F,
    _r: PhantomData<fn(R)>,
}

impl<R, F> Phases<R> for MapOnly<R, F>
where
    R: Send + Sync,
    F: Fn(usize, &R) -> Result<Vec<R>, String> + Send + Sync,
{
    fn run(
        &self,
        inputs: &[&[R]],
        _partitions: usize,
        cfg: &ExecConfig,
    ) -> Result<(Vec<R>, PhaseCounts), PhaseError> {
        Ok((
            map_all(inputs, cfg.parallel, &self.map)?,
            PhaseCounts::default(),
        ))
    }
}

struct MapReduce<R, K, V, M, Rd> {
    map: M,
    reduce: Rd,
    _p: PhantomData<fn(R, K, V)>,
}

fn spill<K, V>(pairs: Vec<(K, V)>) -> Result<Vec<(K, V)>, String>
where
    K: Serialize + DeserializeOwned,
    V: Serialize + DeserializeOwned,
{
    let err = |e: &dyn std::fmt::Display| e.to_string();
    let mut file = tempfile::tempfile().map_err(|e| err(&e))?;
    {
        let mut w = BufWriter::new(&mut file);
        for p in &pairs {
            serde_json::to_writer(&mut w, p).map_err(|e| err(&e))?;
            w.write_all(b"\n").map_err(|e| err(&e))?;
        }
        w.flush().map_err(|e| err(&e))?;
    }
    drop(pairs);
    file.seek(SeekFrom::Start(0)).map_err(|e| err(&e))?;
    BufReader::new(file)
        .lines()
        .map(|l| {
            let l = l.map_err(|e| err(&e))?;
            serde_json::from_str(&l).map_err(|e| err(&e))
        })
        .collect()
}

impl<R, K, V, M, Rd> Phases<R> for MapReduce<R, K, V, M, Rd>
where
    R: Send + Sync,
    K: PartitionKey + Ord + Send + Sync + Serialize + DeserializeOwned,
    V: Send + Sync + Serialize + DeserializeOwned,
    M: Fn(usize, &R) -> Result<Vec<(K, V)>, String> + Send + Sync,
    Rd: Fn(&K, Vec<V>) -> Result<Vec<R>, String> + Send + Sync,
{
    fn run(
        &self,
        inputs: &[&[R]],
        partitions: usize,
        cfg: &ExecConfig,
    ) -> Result<(Vec<R>, PhaseCounts), PhaseError> {
        let pairs = map_all(inputs, cfg.parallel, &self.map)?;
        let shuffle = pairs.len() as u64;
        let mut parts: Vec<Vec<(K, V)>> = (0..partitions).map(|_| Vec::new()).collect();
        for (k, v) in pairs {
            parts[partition_of(&k, partitions, cfg.seed)].push((k, v));
        }
        if cfg.spill_threshold.is_some_and(|t| shuffle as usize > t) {
            parts = parts
                .into_iter()
                .map(spill)
                .collect::<Result<_, _>>()
                .map_err(PhaseError::Spill)?;
        }
        let reduce_part = |mut part: Vec<(K, V)>| -> Result<Vec<R>, String> {
            part.sort_by(|a, b| a.0.cmp(&b.0));
            let mut out = Vec::new();
            let mut it = part.into_iter().peekable();
            while let Some((k, v)) = it.next() {
                let mut vals = vec![v];
                while it.peek().is_some_and(|(k2, _)| *k2 == k) {
                    vals.push(it.next().unwrap().1);
                }
                out.extend((self.reduce)(&k, vals)?);
            }
            Ok(out)
        };
        let results: Vec<Result<Vec<R>, String>> = if cfg.parallel {
            parts.into_par_iter().map(reduce_part).collect()
        } else {
            parts.into_iter().map(reduce_part).collect()
        };
        let mut out = Vec::new();
        for r in results {
            out.extend(r.map_err(PhaseError::User)?);
        }
        let reduce_out = out.len() as u64;
        Ok((
            out,
            PhaseCounts {
                shuffle,
                reduce_out,
            },
        ))
    }
}

/// One map-shuffle-reduce cycle, or a map-only pass.
pub struct Job<R> {
    pub name: String,
    pub inputs: Vec<Handle>,
    pub partitions: usize,
    map_only: bool,
    phases: Box<dyn Phases<R>>,
}

impl<R> std::fmt::Debug for Job<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Job")
            .field("name", &self.name)
            .field("inputs", &self.inputs)
            .field("partitions", &self.partitions)
            .field("map_only", &self.map_only)
            .finish()
    }
}

impl<R: Send + Sync + 'static> Job<R> {
    /// The map function receives the index of the input the record came from.
    pub fn map_only<F>(name: impl Into<String>, inputs: Vec<Handle>, map: F) -> Job<R>
    where
        F: Fn(usize, &R) -> Result<Vec<R>, String> + Send + Sync + 'static,
    {
        Job {
            name: name.into(),
            inputs,
            partitions: 1,
            map_only: true,
            phases: Box::new(MapOnly {
                map,
                _r: PhantomData,
            }),
        }
    }

    pub fn map_reduce<K, V, M, Rd>(
        name: impl Into<String>,
        inputs: Vec<Handle>,
        partitions: usize,
        map: M,
        reduce: Rd,
    ) -> Job<R>
    where
        K: PartitionKey + Ord + Send + Sync + Serialize + DeserializeOwned + 'static,
        V: Send + Sync + Serialize + DeserializeOwned + 'static,
        M: Fn(usize, &R) -> Result<Vec<(K, V)>, String> + Send + Sync + 'static,
        Rd: Fn(&K, Vec<V>) -> Result<Vec<R>, String> + Send + Sync + 'static,
    {
        Job {
            name: name.into(),
            inputs,
            partitions,
            map_only: false,
            phases: Box::new(MapReduce {
                map,
                reduce,
                _p: PhantomData,
            }),
        }
    }

    pub fn is_map_only(&self) -> bool {
        self.map_only
    }
}

/// Source datasets plus the outputs of jobs run so far.
pub struct Registry<R> {
    pub sources: BTreeMap<String, Arc<Vec<R>>>,
    pub outputs: Vec<Arc<Vec<R>>>,
}

impl<R> Default for Registry<R> {
    fn default() -> Self {
        Registry {
            sources: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }
}

impl<R> Registry<R> {
    fn resolve(&self, job: usize, h: &Handle) -> Result<&Arc<Vec<R>>, MrError> {
        let found = match h {
            Handle::Source(s) => self.sources.get(s),
            Handle::Job(j) if *j < job => self.outputs.get(*j),
            Handle::Job(_) => None,
        };
        found.ok_or_else(|| MrError::UnresolvedInput {
            job,
            handle: h.to_string(),
        })
    }
}

/// Runs one job whose position in its workflow is `index`.
pub fn run_job<R: Send + Sync>(
    job: &Job<R>,
    index: usize,
    registry: &Registry<R>,
    cfg: &ExecConfig,
) -> Result<(Vec<R>, JobStats), MrError> {
    if job.partitions == 0 {
        return Err(MrError::ZeroPartitions { job: index });
    }
    let inputs: Vec<&[R]> = job
        .inputs
        .iter()
        .map(|h| registry.resolve(index, h).map(|d| d.as_slice()))
        .collect::<Result<_, _>>()?;
    let map_input_records = inputs.iter().map(|i| i.len() as u64).sum();
    let (out, counts) = job
        .phases
        .run(&inputs, job.partitions, cfg)
        .map_err(|e| match e {
            PhaseError::User(message) => MrError::UserFunction {
                job: index,
                name: job.name.clone(),
                message,
            },
            PhaseError::Spill(message) => MrError::Spill {
                job: index,
                message,
            },
        })?;
    let stats = JobStats {
        id: index,
        name: job.name.clone(),
        map_input_records,
        shuffle_records: counts.shuffle,
        reduce_output_records: counts.reduce_out,
        output_records: out.len() as u64,
        map_only: job.map_only,
    };
    Ok((out, stats))
}

/// An ordered list of jobs over named source datasets.
pub struct Workflow<R> {
    pub sources: BTreeMap<String, Arc<Vec<R>>>,
    pub jobs: Vec<Job<R>>,
}

impl<R> Default for Workflow<R> {
    fn default() -> Self {
        Workflow {
            sources: BTreeMap::new(),
            jobs: Vec::new(),
        }
    }
}

impl<R: Send + Sync + 'static> Workflow<R> {
    pub fn new() -> Workflow<R> {
        Workflow::default()
    }

    pub fn add_source(&mut self, name: impl Into<String>, records: Arc<Vec<R>>) -> Handle {
        let name = name.into();
        self.sources.insert(name.clone(), records);
        Handle::Source(name)
    }

    /// Appends a job and returns the handle of its output.
    pub fn add_job(&mut self, job: Job<R>) -> Handle {
        self.jobs.push(job);
        Handle::Job(self.jobs.len() - 1)
    }

    pub fn run(&self, cfg: &ExecConfig) -> Result<WorkflowResult<R>, MrError> {
        run_workflow(self, cfg)
    }
}

pub struct WorkflowResult<R> {
    pub outputs: Vec<Arc<Vec<R>>>,
    pub stats: RunStats,
}

impl<R: Clone> WorkflowResult<R> {
    /// Output of the last job, empty for an empty workflow.
    pub fn final_output(&self) -> Vec<R> {
        self.outputs.last().map(|o| o.to_vec()).unwrap_or_default()
    }
}

pub fn run_workflow<R: Send + Sync>(
    w: &Workflow<R>,
    cfg: &ExecConfig,
) -> Result<WorkflowResult<R>, MrError> {
    let mut registry = Registry {
        sources: w.sources.clone(),
        outputs: Vec::with_capacity(w.jobs.len()),
    };
    let mut stats = RunStats::new();
    for (i, job) in w.jobs.iter().enumerate() {
        let (out, js) = run_job(job, i, &registry, cfg)?;
        for h in &job.inputs {
            if let Handle::Source(s) = h {
                *stats.input_scans.entry(s.clone()).or_default() += 1;
            }
        }
        log::debug!(
            "job {i} {}: in={} shuffle={} out={}",
            job.name,
            js.map_input_records,
            js.shuffle_records,
            js.output_records
        );
        stats.jobs.push(js);
        stats.jobs_executed += 1;
        registry.outputs.push(Arc::new(out));
    }
    Ok(WorkflowResult {
        outputs: registry.outputs,
        stats,
    })
}
