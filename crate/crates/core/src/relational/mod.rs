//! Relational-style baseline plans: one star-join job per star, left-deep
//! inter-star joins, and a final merge (the union plan); or a shared root
//! pattern with left outer joins and a false-positive filter (the MQO plan).

mod mqo;
mod union;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::mr::{ExecConfig, MrError, RunStats, Workflow};
use crate::query::{Bindings, Var};
use crate::rdf::{Graph, Term, Triple};
use crate::solution::{Row, SolutionSet};

pub use mqo::{build_mqo_plan, compile_mqo, MqoPlan, NotApplicable};
pub use union::compile_union;

pub const SOURCE: &str = "triples";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelRecord {
    Triple(Triple),
    /// Bindings of one branch's stars joined so far.
    Row(Bindings),
    /// A root-pattern match with the optional matches found so far, keyed by branch.
    Root {
        subject: Term,
        root: Bindings,
        optional: BTreeMap<usize, Vec<Bindings>>,
    },
    /// Triples of one subject that residual patterns may use.
    Residual {
        subject: Term,
        triples: Vec<Triple>,
    },
    Solution(Row),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PlanKind {
    Union,
    Mqo,
}

/// A compiled relational workflow awaiting its source dataset.
pub struct RelationalPlan {
    pub kind: PlanKind,
    pub workflow: Workflow<RelRecord>,
    /// Branch each job works for; `None` for jobs shared by all branches.
    pub branch_map: Vec<Option<usize>>,
    pub projection: Vec<Var>,
}

impl RelationalPlan {
    pub fn run(
        &mut self,
        data: Arc<Vec<RelRecord>>,
        cfg: &ExecConfig,
    ) -> Result<(SolutionSet, RunStats), MrError> {
        self.workflow.add_source(SOURCE, data);
        let result = self.workflow.run(cfg)?;
        let mut solutions = SolutionSet::new(self.projection.clone());
        for r in result.outputs.last().iter().flat_map(|o| o.iter()) {
            if let RelRecord::Solution(row) = r {
                solutions.insert(row.clone());
            }
        }
        Ok((solutions, result.stats))
    }
}

pub fn source_records(data: &Graph) -> Arc<Vec<RelRecord>> {
    Arc::new(data.iter().map(|t| RelRecord::Triple(*t)).collect())
}
