use std::sync::Arc;

use proptest::prelude::*;

use ucq_core::mr::{ExecConfig, Job, Workflow};

/// Counts values, then sums the counts per residue class: two shuffles.
fn workflow(values: &[u32], partitions: usize) -> Workflow<(u32, u64)> {
    let mut w = Workflow::new();
    let src = w.add_source("values", Arc::new(values.iter().map(|v| (*v, 1)).collect()));
    let counts = w.add_job(Job::map_reduce(
        "count",
        vec![src],
        partitions,
        |_, r: &(u32, u64)| Ok(vec![(r.0 as u64, r.1)]),
        |k: &u64, vs: Vec<u64>| Ok(vec![(*k as u32, vs.iter().sum())]),
    ));
    w.add_job(Job::map_reduce(
        "by residue",
        vec![counts],
        partitions,
        |_, r: &(u32, u64)| Ok(vec![((r.0 % 7) as u64, r.1)]),
        |k: &u64, vs: Vec<u64>| Ok(vec![(*k as u32, vs.iter().sum())]),
    ));
    w
}

fn sorted(mut v: Vec<(u32, u64)>) -> Vec<(u32, u64)> {
    v.sort();
    v
}

proptest! {
    #[test]
    fn outputs_ignore_partitions_scheduling_and_spills(
        values in prop::collection::vec(0u32..50, 0..300),
        partitions in 1usize..17,
        seed in any::<u64>(),
    ) {
        let reference = workflow(&values, 1).run(&ExecConfig::sequential()).unwrap();
        let cfg = ExecConfig { seed, spill_threshold: Some(8), ..ExecConfig::default() };
        let run = workflow(&values, partitions).run(&cfg).unwrap();
        prop_assert_eq!(sorted(run.final_output()), sorted(reference.final_output()));
        prop_assert_eq!(run.stats.total_shuffle_records(), reference.stats.total_shuffle_records());
        prop_assert_eq!(run.stats.jobs_executed, 2);
        let total: u64 = run.final_output().iter().map(|r| r.1).sum();
        prop_assert_eq!(total, values.len() as u64);
    }

    #[test]
    fn parallel_and_sequential_stats_agree(values in prop::collection::vec(0u32..20, 0..100)) {
        let a = workflow(&values, 4).run(&ExecConfig::default()).unwrap();
        let b = workflow(&values, 4).run(&ExecConfig::sequential()).unwrap();
        prop_assert_eq!(a.final_output(), b.final_output());
        prop_assert_eq!(a.stats, b.stats);
    }
}
