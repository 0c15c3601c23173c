//! Set-semantics query answers shared by every engine and the oracle.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::query::Var;
use crate::rdf::Term;

/// One answer: a value per projected variable. A branch that does not
/// mention a projected variable leaves it unbound.
pub type Row = Vec<Option<Term>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionSet {
    pub variables: Vec<Var>,
    rows: BTreeSet<Row>,
}

fn cmp_row(a: &Row, b: &Row) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = match (x, y) {
            (None, None) => std::cmp::Ordering::Equal,
            (None, Some(_)) => std::cmp::Ordering::Less,
            (Some(_), None) => std::cmp::Ordering::Greater,
            (Some(x), Some(y)) => x.cmp_lexical(*y),
        };
        if o.is_ne() {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

impl SolutionSet {
    pub fn new(variables: Vec<Var>) -> SolutionSet {
        SolutionSet {
            variables,
            rows: BTreeSet::new(),
        }
    }

    pub fn insert(&mut self, row: Row) -> bool {
        debug_assert_eq!(row.len(), self.variables.len());
        self.rows.insert(row)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn contains(&self, row: &Row) -> bool {
        self.rows.contains(row)
    }

    /// Rows in canonical (lexical) order.
    pub fn sorted_rows(&self) -> Vec<&Row> {
        let mut rows: Vec<&Row> = self.rows.iter().collect();
        rows.sort_by(|a, b| cmp_row(a, b));
        rows
    }

    /// Rows present in exactly one of the two sets, tagged with the side.
    pub fn difference(&self, other: &SolutionSet) -> Vec<(bool, Row)> {
        let mut out: Vec<(bool, Row)> = self
            .rows
            .difference(&other.rows)
            .map(|r| (true, r.clone()))
            .collect();
        out.extend(
            other
                .rows
                .difference(&self.rows)
                .map(|r| (false, r.clone())),
        );
        out
    }

    /// Tab-separated output: a header of variable names, then one sorted row
    /// per line, with unbound values left empty.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = self.variables.iter().map(|v| v.to_string()).collect();
        out.push_str(&header.join("\t"));
        out.push('\n');
        for row in self.sorted_rows() {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push('\t');
                }
                if let Some(t) = cell {
                    let _ = write!(out, "{t}");
                }
            }
            out.push('\n');
        }
        out
    }
}

impl Extend<Row> for SolutionSet {
    fn extend<I: IntoIterator<Item = Row>>(&mut self, iter: I) {
        for r in iter {
            self.insert(r);
        }
    }
}
