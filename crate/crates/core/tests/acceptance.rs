//! Prints one PASS/FAIL line per acceptance criterion, then a shuffle-volume
//! line. Exits non-zero when a criterion fails that is not a known gap.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use ucq_core::bench::{
    class_iri, compare, gen_synthetic, oracle_forward_chain, oracle_match, rewrite, run_engine,
    BenchReport, GenSpec,
};
use ucq_core::corpus;
use ucq_core::inference::{rewrite_to_ucq, SchemaClosure};
use ucq_core::mr::ExecConfig;
use ucq_core::planner::{compile, predict_job_count, Engine};
use ucq_core::query::{parse_query, Ucq};
use ucq_core::rdf::Graph;

const CORPUS_INSTANCES: usize = 15_000;
const CRITERION_1_LIMIT: Duration = Duration::from_secs(10);
const CORPUS_RUN_LIMIT: Duration = Duration::from_secs(300);
const REWRITE_LIMIT: Duration = Duration::from_secs(5);
const REWRITE_CLASSES: usize = 10_000;
const INFERENCE_INSTANCES: u64 = 500;
const PARTITIONS: [usize; 3] = [1, 4, 16];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn corpus_data() -> Graph {
    gen_synthetic(&corpus::data_spec(CORPUS_INSTANCES, 2024)).0
}

fn criterion_1(data: &Graph) -> Outcome {
    let q = corpus::parsed()
        .into_iter()
        .find(|(n, _)| *n == "UQ12+")
        .unwrap()
        .1;
    let start = Instant::now();
    let mut measured = Vec::new();
    for engine in Engine::ALL {
        let (_, stats) = run_engine(&q, data, engine, 4, &ExecConfig::default()).unwrap();
        measured.push((engine, stats.jobs_executed, stats.total_scans()));
    }
    let elapsed = start.elapsed();
    let want = [
        (Engine::Ntga, Some(1), 1),
        (Engine::RelationalUnion, Some(13), 12),
        (Engine::RelationalMqo, None, 1),
    ];
    let ok = q.width() == 12
        && q.max_stars() == 1
        && want
            .iter()
            .zip(&measured)
            .all(|((_, jobs, scans), (_, j, s))| {
                jobs.is_none_or(|jobs| jobs == *j) && *s == *scans
            })
        && elapsed < CRITERION_1_LIMIT;
    let cells: Vec<String> = measured
        .iter()
        .map(|(e, j, s)| format!("{e} {j} jobs/{s} scans"))
        .collect();
    outcome(
        ok,
        format!(
            "{}; {} triples in {:.2?}",
            cells.join(", "),
            data.len(),
            elapsed
        ),
    )
}

fn criterion_2(data: &Graph) -> Outcome {
    let mut ok = true;
    let mut cells = Vec::new();
    for n in 1..=4usize {
        let pats: Vec<String> = (0..n)
            .map(|k| {
                if k + 1 < n {
                    format!("?s{k} <http://example.org/gen/p1> ?s{}", k + 1)
                } else {
                    format!("?s{k} <http://example.org/gen/p0> ?o")
                }
            })
            .collect();
        let q = parse_query(&format!("SELECT * {{ {} }}", pats.join(" . "))).unwrap();
        let mut got = Vec::new();
        for (engine, want) in [(Engine::RelationalUnion, 2 * n - 1 + 1), (Engine::Ntga, n)] {
            let predicted = predict_job_count(&q, engine).unwrap().0;
            let (_, stats) = compile(&q, engine, 4)
                .unwrap()
                .run(data, &ExecConfig::default())
                .unwrap();
            ok &= predicted == want && stats.jobs_executed == want;
            got.push(stats.jobs_executed);
        }
        cells.push(format!("n={n}: relational {} ntga {}", got[0], got[1]));
    }
    outcome(ok, cells.join(", "))
}

fn criterion_3() -> Outcome {
    let mut mismatches = 0;
    let mut checked = 0;
    for seed in 0..INFERENCE_INSTANCES {
        let inst = common::instance(seed);
        let q = parse_query(&inst.query).unwrap();
        let expected = oracle_match(&q, &oracle_forward_chain(&inst.data, &inst.schema));
        let rewritten = rewrite(&q, &inst.schema).unwrap();
        for engine in Engine::ALL {
            if predict_job_count(&rewritten, engine).is_err() {
                continue;
            }
            let (got, _) =
                run_engine(&rewritten, &inst.data, engine, 3, &ExecConfig::default()).unwrap();
            checked += 1;
            if !got.difference(&expected).is_empty() {
                mismatches += 1;
            }
        }
    }
    outcome(
        mismatches == 0,
        format!("{INFERENCE_INSTANCES} instances, {checked} engine runs, {mismatches} mismatches"),
    )
}

fn run_corpus(
    data: &Graph,
    partitions: usize,
) -> Result<Vec<(&'static str, BenchReport, Duration)>, String> {
    let mut out = Vec::new();
    for (name, q) in corpus::parsed() {
        let start = Instant::now();
        let report = compare(name, &q, data, None, partitions, &ExecConfig::default())
            .map_err(|e| e.to_string())?;
        out.push((name, report, start.elapsed()));
    }
    Ok(out)
}

fn criterion_4(
    runs: &Result<Vec<(&str, BenchReport, Duration)>, String>,
    triples: usize,
) -> Outcome {
    match runs {
        Err(e) => outcome(false, e.clone()),
        Ok(runs) => {
            let slowest = runs.iter().map(|r| r.2).max().unwrap_or_default();
            let engines: usize = runs.iter().map(|r| r.1.rows.len()).sum();
            outcome(
                slowest < CORPUS_RUN_LIMIT && runs.len() == 20 && (100_000..=1_000_000).contains(&triples),
                format!(
                    "{} queries, {engines} engine runs, 0 mismatches on {triples} triples; slowest query {slowest:.2?}",
                    runs.len()
                ),
            )
        }
    }
}

fn criterion_5() -> Outcome {
    let all = common::mismatches(true);
    let detail = if all.is_empty() {
        "every cell reproduced".to_string()
    } else {
        format!("{} of 120 cells differ: {}", all.len(), all.join("; "))
    };
    outcome(all.is_empty(), detail)
}

fn criterion_6() -> Outcome {
    let spec = GenSpec {
        classes: REWRITE_CLASSES,
        depth: 25,
        fanout: 2,
        instances: 0,
        properties: 0,
        mvp_rate: 0.0,
        seed: 25,
    };
    let (_, schema) = gen_synthetic(&spec);
    let q: Ucq = parse_query(&format!("SELECT ?s {{ ?s a {} }}", class_iri(0))).unwrap();
    let start = Instant::now();
    let u = rewrite_to_ucq(&q, &SchemaClosure::build(&schema)).unwrap();
    let elapsed = start.elapsed();
    outcome(
        u.width() == REWRITE_CLASSES && elapsed < REWRITE_LIMIT,
        format!(
            "{} branches for {REWRITE_CLASSES} classes at depth 25 in {elapsed:.2?}",
            u.width()
        ),
    )
}

fn criterion_7(data: &Graph) -> Outcome {
    let cfg = ExecConfig::default();
    let mut differing = Vec::new();
    for (name, q) in corpus::parsed() {
        for engine in Engine::ALL {
            if predict_job_count(&q, engine).is_err() {
                continue;
            }
            let outputs: Vec<_> = PARTITIONS
                .iter()
                .map(|&p| run_engine(&q, data, engine, p, &cfg).unwrap().0)
                .collect();
            if outputs.windows(2).any(|w| w[0] != w[1]) {
                differing.push(format!("{name}/{engine}"));
            }
        }
    }
    outcome(
        differing.is_empty(),
        if differing.is_empty() {
            format!("all corpus queries identical for partitions {PARTITIONS:?}")
        } else {
            format!("differs: {}", differing.join(", "))
        },
    )
}

fn shuffle_line(runs: &Result<Vec<(&str, BenchReport, Duration)>, String>) -> Outcome {
    let Ok(runs) = runs else {
        return outcome(false, "corpus run failed");
    };
    let mut above = Vec::new();
    let (mut ntga_total, mut union_total) = (0, 0);
    for (name, report, _) in runs {
        let ntga = report.row(Engine::Ntga).unwrap().shuffle_records;
        ntga_total += ntga;
        union_total += report.row(Engine::RelationalUnion).unwrap().shuffle_records;
        for row in report.rows.iter().filter(|r| r.engine != "ntga") {
            if ntga > row.shuffle_records {
                above.push(format!("{name} vs {}", row.engine));
            }
        }
    }
    outcome(
        above.is_empty(),
        format!("ntga {ntga_total} vs relational-union {union_total} records over the corpus; exceeded on {above:?}"),
    )
}

/// Criteria that cannot pass as stated, with the reason.
const KNOWN_GAPS: [(&str, &str); 1] = [(
    "5",
    "the reference UQ5 row lists edges 2:1 (two stars) with one star pattern",
)];

fn main() -> ExitCode {
    let data = corpus_data();
    let runs = run_corpus(&data, 4);
    let results = [
        (
            "1",
            "width-12 single-star UCQ job and scan counts",
            criterion_1(&data),
        ),
        (
            "2",
            "workflow length 2n-1 (+1 merge) vs n",
            criterion_2(&data),
        ),
        ("3", "rewriting equals forward chaining", criterion_3()),
        (
            "4",
            "tri-engine agreement on the corpus",
            criterion_4(&runs, data.len()),
        ),
        ("5", "reference query statistics", criterion_5()),
        ("6", "deep-hierarchy rewrite scaling", criterion_6()),
        ("7", "partition invariance", criterion_7(&data)),
        (
            "shuffle",
            "ntga shuffle volume at most relational",
            shuffle_line(&runs),
        ),
    ];
    let mut unexpected = 0;
    for (id, title, o) in &results {
        let gap = KNOWN_GAPS.iter().find(|(g, _)| g == id);
        let status = match (o.pass, gap) {
            (true, _) => "PASS".to_string(),
            (false, Some((_, why))) => format!("FAIL (known gap: {why})"),
            (false, None) => {
                unexpected += 1;
                "FAIL".to_string()
            }
        };
        let label = if id.parse::<u32>().is_ok() {
            format!("criterion {id}")
        } else {
            id.to_string()
        };
        println!("{label}: {status}: {title}: {}", o.detail);
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
