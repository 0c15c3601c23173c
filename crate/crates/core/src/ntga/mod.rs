//! Nested triplegroup algebra: subject-grouped triples filtered by a
//! disjunction of star patterns, joined into nested groups, and flattened
//! back into solutions.

mod ops;
mod plan;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval;
use crate::query::{StarPattern, Ucq, Var};
use crate::rdf::{Term, Triple};

pub use ops::{
    flatten, tg_group_by, tg_group_filter, tg_join, tg_load_filter, tg_ujoin, UJoinOperand,
};
pub use ops::{LoadFilter, PositionConstraint};
pub use plan::{
    compile, execute, join_rounds, source_records, JoinRound, NtgaPlan, NtgaRecord, SOURCE,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NtgaError {
    #[error("incompatible grouping: {0}")]
    IncompatibleGrouping(String),
}

/// All triples of one subject, typed by their property set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TripleGroup {
    pub subject: Term,
    /// Sorted by property, then object.
    pub triples: Vec<Triple>,
    pub tg_type: BTreeSet<Term>,
    pub match_tags: BTreeSet<usize>,
}

impl TripleGroup {
    pub fn new(subject: Term, mut triples: Vec<Triple>) -> TripleGroup {
        debug_assert!(triples.iter().all(|t| t.subject == subject));
        eval::sort_group(&mut triples);
        let tg_type = triples.iter().map(|t| t.property).collect();
        TripleGroup {
            subject,
            triples,
            tg_type,
            match_tags: BTreeSet::new(),
        }
    }

    pub fn triples_with(&self, property: Term) -> &[Triple] {
        eval::property_range(&self.triples, property)
    }

    /// Keeps only triples some pattern of the given stars can use.
    pub fn trimmed<'a>(&self, stars: impl IntoIterator<Item = &'a StarPattern>) -> TripleGroup {
        let stars: Vec<&StarPattern> = stars.into_iter().collect();
        let triples = self
            .triples
            .iter()
            .filter(|t| stars.iter().any(|s| eval::star_admits(s, t)))
            .copied()
            .collect();
        let mut g = TripleGroup::new(self.subject, triples);
        g.match_tags = self.match_tags.clone();
        g
    }
}

/// Values of the join variables that link a child group to its parent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct JoinSlot {
    pub bindings: Vec<(Var, Term)>,
}

/// A triplegroup with the groups joined to it, as produced by TG_Join.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NestedTripleGroup {
    /// Index of the star this group matches within its branch.
    pub star: usize,
    pub root: TripleGroup,
    pub children: Vec<(JoinSlot, NestedTripleGroup)>,
}

impl NestedTripleGroup {
    pub fn leaf(star: usize, root: TripleGroup) -> NestedTripleGroup {
        NestedTripleGroup {
            star,
            root,
            children: Vec::new(),
        }
    }

    /// Nodes in depth-first order.
    pub fn nodes(&self) -> Vec<&NestedTripleGroup> {
        let mut out = vec![self];
        for (_, c) in &self.children {
            out.extend(c.nodes());
        }
        out
    }

    pub fn stars(&self) -> BTreeSet<usize> {
        self.nodes().iter().map(|n| n.star).collect()
    }

    /// Attaches `child` below the node for star `parent_star`.
    pub fn attach(&mut self, parent_star: usize, slot: JoinSlot, child: NestedTripleGroup) -> bool {
        if self.star == parent_star {
            self.children.push((slot, child));
            return true;
        }
        for (_, c) in &mut self.children {
            if c.attach(parent_star, slot.clone(), child.clone()) {
                return true;
            }
        }
        false
    }

    /// Join-slot bindings of the whole tree.
    pub fn slot_bindings(&self) -> Vec<(Var, Term)> {
        let mut out = Vec::new();
        for (slot, c) in &self.children {
            out.extend(slot.bindings.iter().cloned());
            out.extend(c.slot_bindings());
        }
        out
    }
}

/// One deduplicated star of the query, as a TG_GroupFilter alternative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarAlternative {
    pub id: usize,
    pub star: StarPattern,
}

/// The disjunction of all stars of all branches. A group passes if it
/// satisfies at least one alternative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisjunctiveStarFilter {
    pub alternatives: Vec<StarAlternative>,
    /// (branch, star index) → alternative id.
    pub star_alt: BTreeMap<(usize, usize), usize>,
}

impl DisjunctiveStarFilter {
    /// One alternative per distinct star content across the query.
    pub fn from_ucq(q: &Ucq) -> DisjunctiveStarFilter {
        let mut alternatives: Vec<StarAlternative> = Vec::new();
        let mut by_key: BTreeMap<Vec<crate::query::TriplePattern>, usize> = BTreeMap::new();
        let mut star_alt = BTreeMap::new();
        for (b, branch) in q.branches.iter().enumerate() {
            for (s, star) in branch.stars.iter().enumerate() {
                let key = star.content_key();
                let id = *by_key.entry(key).or_insert_with(|| {
                    alternatives.push(StarAlternative {
                        id: alternatives.len(),
                        star: star.clone(),
                    });
                    alternatives.len() - 1
                });
                star_alt.insert((b, s), id);
            }
        }
        DisjunctiveStarFilter {
            alternatives,
            star_alt,
        }
    }

    pub fn from_stars(stars: Vec<StarPattern>) -> DisjunctiveStarFilter {
        DisjunctiveStarFilter {
            alternatives: stars
                .into_iter()
                .enumerate()
                .map(|(id, star)| StarAlternative { id, star })
                .collect(),
            star_alt: BTreeMap::new(),
        }
    }

    /// Tag test: the group's type covers the required properties, the subject
    /// fits, and every pattern's ground positions are met by some triple.
    pub fn satisfies(alt: &StarAlternative, g: &TripleGroup) -> bool {
        eval::subject_fits(&alt.star, g.subject)
            && alt.star.required_properties.is_subset(&g.tg_type)
            && alt.star.patterns.iter().all(|p| {
                let pool = match p.property.as_const() {
                    Some(prop) => g.triples_with(prop),
                    None => &g.triples[..],
                };
                pool.iter().any(|t| p.admits(t))
            })
    }

    pub fn tags(&self, g: &TripleGroup) -> BTreeSet<usize> {
        self.alternatives
            .iter()
            .filter(|a| Self::satisfies(a, g))
            .map(|a| a.id)
            .collect()
    }
}
