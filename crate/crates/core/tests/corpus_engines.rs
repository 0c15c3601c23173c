use ucq_core::bench::{compare, gen_synthetic};
use ucq_core::corpus;
use ucq_core::mr::ExecConfig;
use ucq_core::planner::{predict_job_count, Engine};

#[test]
fn engines_agree_and_match_predictions() {
    let (data, _) = gen_synthetic(&corpus::data_spec(2_000, 3));
    for (name, q) in corpus::parsed() {
        let report = compare(name, &q, &data, None, 4, &ExecConfig::default())
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        for row in &report.rows {
            let engine: Engine = row.engine.parse().unwrap();
            let (jobs, scans) = predict_job_count(&q, engine).unwrap();
            assert_eq!(
                (row.jobs, row.scans),
                (jobs, scans as u64),
                "{name} {engine}"
            );
        }
        let ntga = report.row(Engine::Ntga).unwrap();
        for row in report.rows.iter().filter(|r| r.engine != "ntga") {
            assert!(
                ntga.jobs <= row.jobs,
                "{name}: ntga jobs above {}",
                row.engine
            );
            assert!(
                ntga.shuffle_records <= row.shuffle_records,
                "{name}: ntga shuffles {} > {} of {}",
                ntga.shuffle_records,
                row.shuffle_records,
                row.engine
            );
        }
    }
}

#[test]
fn answers_do_not_depend_on_partitions_or_scheduling() {
    let (data, _) = gen_synthetic(&corpus::data_spec(1_000, 5));
    for (name, q) in corpus::parsed() {
        let reference = compare(name, &q, &data, None, 1, &ExecConfig::sequential()).unwrap();
        for partitions in [4, 16] {
            let r = compare(name, &q, &data, None, partitions, &ExecConfig::default()).unwrap();
            let counts = |rep: &ucq_core::bench::BenchReport| {
                rep.rows
                    .iter()
                    .map(|r| (r.engine.clone(), r.results, r.jobs))
                    .collect::<Vec<_>>()
            };
            assert_eq!(
                counts(&r),
                counts(&reference),
                "{name} at {partitions} partitions"
            );
        }
    }
}

#[test]
fn mqo_applies_where_branches_share_a_root() {
    let applicable: Vec<&str> = corpus::parsed()
        .into_iter()
        .filter(|(_, q)| q.width() > 1 && predict_job_count(q, Engine::RelationalMqo).is_ok())
        .map(|(n, _)| n)
        .collect();
    assert_eq!(applicable, ["UQ4+", "UQ12+"]);
}
