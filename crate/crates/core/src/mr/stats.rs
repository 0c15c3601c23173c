use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub const STATS_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct JobStats {
    pub id: usize,
    pub name: String,
    pub map_input_records: u64,
    pub shuffle_records: u64,
    pub reduce_output_records: u64,
    /// Records written by the job, whichever phase produced them.
    pub output_records: u64,
    pub map_only: bool,
}

/// Counters of one workflow run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunStats {
    pub stats_version: u32,
    pub jobs: Vec<JobStats>,
    /// Reads per source dataset.
    pub input_scans: BTreeMap<String, u64>,
    pub jobs_executed: usize,
}

impl RunStats {
    pub fn new() -> RunStats {
        RunStats {
            stats_version: STATS_VERSION,
            ..RunStats::default()
        }
    }

    pub fn total_scans(&self) -> u64 {
        self.input_scans.values().sum()
    }

    pub fn total_shuffle_records(&self) -> u64 {
        self.jobs.iter().map(|j| j.shuffle_records).sum()
    }

    pub fn total_map_input_records(&self) -> u64 {
        self.jobs.iter().map(|j| j.map_input_records).sum()
    }

    pub fn total_reduce_output_records(&self) -> u64 {
        self.jobs.iter().map(|j| j.reduce_output_records).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialize")
    }

    pub fn from_json(text: &str) -> serde_json::Result<RunStats> {
        serde_json::from_str(text)
    }
}
