mod common;

use common::mismatches;
use ucq_core::corpus;

#[test]
fn corpus_reproduces_reference_cells() {
    assert_eq!(mismatches(false), Vec::<String>::new());
}

#[test]
#[ignore = "the reference UQ5 row is self-contradictory"]
fn corpus_reproduces_every_reference_cell() {
    assert_eq!(mismatches(true), Vec::<String>::new());
}

#[test]
fn corpus_has_fourteen_plain_and_six_union_queries() {
    let parsed = corpus::parsed();
    assert_eq!(parsed.iter().filter(|(_, q)| q.width() == 1).count(), 14);
    assert_eq!(parsed.iter().filter(|(_, q)| q.width() > 1).count(), 6);
}
