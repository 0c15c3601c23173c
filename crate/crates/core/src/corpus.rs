//! Benchmark queries: fourteen conjunctive queries and six unions, written
//! against the vocabulary of [`crate::bench::gen_synthetic`].

use crate::bench::GenSpec;
use crate::query::{parse_query, Ucq};

pub const QUERIES: [(&str, &str); 20] = [
    ("UQ1", include_str!("../corpus/UQ1.rq")),
    ("UQ2", include_str!("../corpus/UQ2.rq")),
    ("UQ4", include_str!("../corpus/UQ4.rq")),
    ("UQ5", include_str!("../corpus/UQ5.rq")),
    ("UQ6", include_str!("../corpus/UQ6.rq")),
    ("UQ7", include_str!("../corpus/UQ7.rq")),
    ("UQ8", include_str!("../corpus/UQ8.rq")),
    ("UQ9", include_str!("../corpus/UQ9.rq")),
    ("UQ12", include_str!("../corpus/UQ12.rq")),
    ("CRQ7", include_str!("../corpus/CRQ7.rq")),
    ("CRQ9", include_str!("../corpus/CRQ9.rq")),
    ("CRQ13", include_str!("../corpus/CRQ13.rq")),
    ("CRQ22", include_str!("../corpus/CRQ22.rq")),
    ("CRQ23", include_str!("../corpus/CRQ23.rq")),
    ("UQ1+", include_str!("../corpus/UQ1+.rq")),
    ("UQ2+", include_str!("../corpus/UQ2+.rq")),
    ("UQ3", include_str!("../corpus/UQ3.rq")),
    ("UQ4+", include_str!("../corpus/UQ4+.rq")),
    ("UQ12+", include_str!("../corpus/UQ12+.rq")),
    ("UQ18", include_str!("../corpus/UQ18.rq")),
];

pub fn query_text(name: &str) -> Option<&'static str> {
    QUERIES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Every corpus query, parsed.
pub fn parsed() -> Vec<(&'static str, Ucq)> {
    QUERIES
        .iter()
        .map(|(n, t)| {
            (
                *n,
                parse_query(t).unwrap_or_else(|e| panic!("corpus query {n}: {e}")),
            )
        })
        .collect()
}

/// Dataset shape the corpus queries are written for; `instances` sets the size.
pub fn data_spec(instances: usize, seed: u64) -> GenSpec {
    GenSpec {
        classes: 40,
        depth: 6,
        fanout: 3,
        instances,
        properties: 20,
        mvp_rate: 0.2,
        seed,
    }
}
