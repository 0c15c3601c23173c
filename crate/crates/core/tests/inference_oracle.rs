mod common;

use proptest::prelude::*;

use common::instance;
use ucq_core::bench::{oracle_forward_chain, oracle_match, rewrite, run_engine};
use ucq_core::mr::ExecConfig;
use ucq_core::planner::{predict_job_count, Engine};
use ucq_core::query::parse_query;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn rewritten_answers_equal_materialized_answers(seed in any::<u64>()) {
        let inst = instance(seed);
        let q = parse_query(&inst.query).unwrap();
        let expected = oracle_match(&q, &oracle_forward_chain(&inst.data, &inst.schema));
        let rewritten = rewrite(&q, &inst.schema).unwrap();
        for engine in Engine::ALL {
            if predict_job_count(&rewritten, engine).is_err() {
                continue;
            }
            let (got, _) = run_engine(&rewritten, &inst.data, engine, 3, &ExecConfig::default()).unwrap();
            prop_assert_eq!(got.difference(&expected), vec![], "{} on {}", engine, inst.query);
        }
    }
}

#[test]
fn generated_instances_are_not_vacuous() {
    let mut answered = 0;
    let mut rewritten_wider = 0;
    for seed in 0..500 {
        let inst = instance(seed);
        let q = parse_query(&inst.query).unwrap();
        if !oracle_match(&q, &oracle_forward_chain(&inst.data, &inst.schema)).is_empty() {
            answered += 1;
        }
        if rewrite(&q, &inst.schema).unwrap().width() > q.width() {
            rewritten_wider += 1;
        }
    }
    assert!(
        answered >= 250,
        "only {answered} of 500 instances have answers"
    );
    assert!(
        rewritten_wider >= 150,
        "only {rewritten_wider} of 500 rewrites add branches"
    );
}
