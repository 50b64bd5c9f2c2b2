//! Fixtures shared by the benchmarks: a seeded synthetic relation, the
//! template workload over it, and a partitioning at a given size threshold.

use packq::partition::{partition, PartitionParams, Partitioning};
use packq::workload::{column_name, generate_relation, template_workload, ColumnDist};
use packq::{derive_bounds, parse, translate, validate, CheckedQuery, IlpModel, Relation};

pub struct Fixture {
    pub rel: Relation,
    pub queries: Vec<CheckedQuery>,
    pub attrs: Vec<String>,
}

/// `rows` tuples over four uniform `[0, 100]` columns, data seed 1, with the
/// five template queries (expected size 10, REPEAT 0, seed 7).
pub fn fixture(rows: usize) -> Fixture {
    let rel = generate_relation("R", rows, &[ColumnDist::Uniform { lo: 0.0, hi: 100.0 }; 4], 1)
        .expect("valid generator settings");
    let attrs: Vec<String> = (0..4).map(column_name).collect();
    let queries = template_workload(&rel, &attrs, 10.0, Some(0), 7)
        .expect("valid workload settings")
        .iter()
        .map(|text| validate(&parse(text).expect("template parses"), rel.schema()).expect("template validates"))
        .collect();
    Fixture { rel, queries, attrs }
}

impl Fixture {
    /// Bounded ILP of query `i` over the whole relation.
    pub fn model(&self, i: usize) -> IlpModel {
        derive_bounds(&translate(&self.queries[i], &self.rel)).expect("REPEAT bounds every variable")
    }

    pub fn partitioning(&self, tau: usize) -> Partitioning {
        partition(
            &self.rel,
            &PartitionParams {
                attrs: self.attrs.clone(),
                tau,
                omega: f64::INFINITY,
            },
        )
        .expect("valid partition settings")
    }
}
