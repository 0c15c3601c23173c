//! Seeded synthetic datasets: a class taxonomy of exact depth, a small
//! property hierarchy with domains and ranges, and typed instances with
//! star-shaped attributes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::rdf::vocab::vocab;
use crate::rdf::{Graph, Term, Triple};

pub const GEN_NS: &str = "http://example.org/gen/";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    /// Total classes including the root.
    pub classes: usize,
    /// Length of the longest subclass chain below the root.
    pub depth: usize,
    pub fanout: usize,
    pub instances: usize,
    pub properties: usize,
    /// Probability that an attribute gets two or three values instead of one.
    pub mvp_rate: f64,
    pub seed: u64,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            classes: 15,
            depth: 3,
            fanout: 2,
            instances: 100,
            properties: 6,
            mvp_rate: 0.2,
            seed: 7,
        }
    }
}

pub fn class_iri(i: usize) -> Term {
    Term::iri(&format!("{GEN_NS}C{i}"))
}

pub fn property_iri(j: usize) -> Term {
    Term::iri(&format!("{GEN_NS}p{j}"))
}

pub fn instance_iri(k: usize) -> Term {
    Term::iri(&format!("{GEN_NS}i{k}"))
}

/// Parent of each class (`None` for the root, class 0). Class `i` for
/// `1 ≤ i ≤ depth` forms the spine that guarantees the requested depth.
pub fn taxonomy(spec: &GenSpec, rng: &mut ChaCha8Rng) -> Vec<Option<usize>> {
    assert!(
        spec.classes > spec.depth,
        "need more classes than the depth"
    );
    assert!(
        spec.depth == 0 || spec.fanout > 0,
        "fanout must be positive"
    );
    let mut parent = vec![None];
    let mut level = vec![0usize];
    let mut children = vec![0usize];
    for i in 1..=spec.depth {
        parent.push(Some(i - 1));
        level.push(i);
        children.push(0);
        children[i - 1] += 1;
    }
    let mut open: Vec<usize> = (0..=spec.depth)
        .filter(|&c| level[c] < spec.depth && children[c] < spec.fanout)
        .collect();
    while parent.len() < spec.classes {
        assert!(
            !open.is_empty(),
            "taxonomy of this depth and fanout is full"
        );
        let slot = rng.gen_range(0..open.len());
        let p = open[slot];
        let c = parent.len();
        parent.push(Some(p));
        level.push(level[p] + 1);
        children.push(0);
        children[p] += 1;
        if children[p] >= spec.fanout {
            open.swap_remove(slot);
        }
        if level[c] < spec.depth {
            open.push(c);
        }
    }
    parent
}

/// Returns `(data, schema)`.
pub fn gen_synthetic(spec: &GenSpec) -> (Graph, Graph) {
    let v = vocab();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut schema = Graph::new();
    let parent = taxonomy(spec, &mut rng);
    for (c, p) in parent.iter().enumerate() {
        if let Some(p) = p {
            schema.insert(Triple::from_parts(
                class_iri(c),
                v.sub_class_of,
                class_iri(*p),
            ));
        }
    }
    // Odd properties link instances, even ones carry literals.
    for j in 0..spec.properties {
        if j > 0 && rng.gen_bool(0.3) {
            let sup = rng.gen_range(0..j);
            if sup % 2 == j % 2 {
                schema.insert(Triple::from_parts(
                    property_iri(j),
                    v.sub_property_of,
                    property_iri(sup),
                ));
            }
        }
        if rng.gen_bool(0.5) {
            let c = rng.gen_range(0..spec.classes);
            schema.insert(Triple::from_parts(property_iri(j), v.domain, class_iri(c)));
        }
        if j % 2 == 1 && rng.gen_bool(0.5) {
            let c = rng.gen_range(0..spec.classes);
            schema.insert(Triple::from_parts(property_iri(j), v.range, class_iri(c)));
        }
    }

    // Low-numbered properties are common, high-numbered ones rare.
    let mut data = Graph::new();
    for k in 0..spec.instances {
        let s = instance_iri(k);
        data.insert(Triple::from_parts(
            s,
            v.rdf_type,
            class_iri(rng.gen_range(0..spec.classes)),
        ));
        for j in 0..spec.properties {
            if !rng.gen_bool(0.8 / (1.0 + j as f64 / 3.0)) {
                continue;
            }
            let values = if rng.gen_bool(spec.mvp_rate.clamp(0.0, 1.0)) {
                rng.gen_range(2..=3)
            } else {
                1
            };
            for _ in 0..values {
                let o = if j % 2 == 1 {
                    instance_iri(rng.gen_range(0..spec.instances))
                } else {
                    Term::literal(&format!("v{}", rng.gen_range(0..spec.instances * 2)))
                };
                data.insert(Triple::from_parts(s, property_iri(j), o));
            }
        }
    }
    (data, schema)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::serialize_ntriples;

    fn depth_of(parent: &[Option<usize>]) -> usize {
        (0..parent.len())
            .map(|mut c| {
                let mut d = 0;
                while let Some(p) = parent[c] {
                    c = p;
                    d += 1;
                }
                d
            })
            .max()
            .unwrap()
    }

    #[test]
    fn exact_depth() {
        let spec = GenSpec {
            classes: 200,
            depth: 25,
            fanout: 2,
            ..GenSpec::default()
        };
        let parent = taxonomy(&spec, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(parent.len(), 200);
        assert_eq!(depth_of(&parent), 25);
        for c in 0..parent.len() {
            assert!(parent.iter().filter(|p| **p == Some(c)).count() <= 2);
        }
    }

    #[test]
    fn no_instances_means_schema_only() {
        let (data, schema) = gen_synthetic(&GenSpec {
            instances: 0,
            ..GenSpec::default()
        });
        assert!(data.is_empty());
        assert!(!schema.is_empty());
    }

    #[test]
    fn deterministic_output() {
        let spec = GenSpec::default();
        let (a, sa) = gen_synthetic(&spec);
        let (b, sb) = gen_synthetic(&spec);
        assert_eq!(serialize_ntriples(&a), serialize_ntriples(&b));
        assert_eq!(serialize_ntriples(&sa), serialize_ntriples(&sb));
    }
}
