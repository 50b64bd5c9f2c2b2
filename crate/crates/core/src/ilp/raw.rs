use serde::{Deserialize, Serialize};

use super::{IlpModel, LinearConstraint, ModelError, Variable};
use crate::paql::{AggregateExpr, Bound, GlobalOp, GlobalPredicate, Objective, PackageQuery, Sense};
use crate::relation::Relation;

/// `maximize Σ a_i x_i  s.t.  Σ_i b_ij x_i ≤ c_j,  x_i ∈ ℤ≥0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawIlp {
    pub n: usize,
    pub k: usize,
    pub a: Vec<f64>,
    /// `n` rows of `k` coefficients.
    pub b: Vec<Vec<f64>>,
    pub c: Vec<f64>,
}

impl RawIlp {
    pub fn check(&self) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::InvalidInstance(m));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.a.len() != self.n || self.b.len() != self.n || self.c.len() != self.k {
            return bad(format!(
                "shape mismatch: n={}, k={}, |a|={}, |b|={}, |c|={}",
                self.n,
                self.k,
                self.a.len(),
                self.b.len(),
                self.c.len()
            ));
        }
        if let Some(i) = self.b.iter().position(|row| row.len() != self.k) {
            return bad(format!("row {i} of b has {} entries, expected {}", self.b[i].len(), self.k));
        }
        let finite = self.a.iter().chain(self.c.iter()).chain(self.b.iter().flatten()).all(|v| v.is_finite());
        if !finite {
            return bad("non-finite coefficient".into());
        }
        Ok(())
    }

    /// The instance itself as a model (variables unbounded above).
    pub fn to_model(&self) -> IlpModel {
        IlpModel {
            variables: (0..self.n)
                .map(|tuple_id| Variable {
                    tuple_id,
                    lower: 0,
                    upper: None,
                })
                .collect(),
            constraints: (0..self.k)
                .map(|j| LinearConstraint {
                    coefficients: self.b.iter().map(|row| row[j]).collect(),
                    op: GlobalOp::Le,
                    rhs: self.c[j],
                    source: Some(j),
                })
                .collect(),
            sense: Sense::Maximize,
            objective: self.a.clone(),
        }
    }
}

pub const OBJECTIVE_ATTR: &str = "attr_obj";

pub fn constraint_attr(j: usize) -> String {
    format!("attr_{}", j + 1)
}

/// Maps an ILP to a relation `R(attr_obj, attr_1..attr_k)` with one tuple
/// per variable and a query `SUM(P.attr_j) <= c_j`, `MAXIMIZE SUM(P.attr_obj)`,
/// without REPEAT.
pub fn ilp_to_paql(ilp: &RawIlp) -> Result<(Relation, PackageQuery), ModelError> {
    ilp.check()?;
    let mut names = vec![OBJECTIVE_ATTR.to_string()];
    names.extend((0..ilp.k).map(constraint_attr));
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let rows: Vec<Vec<f64>> = (0..ilp.n)
        .map(|i| std::iter::once(ilp.a[i]).chain(ilp.b[i].iter().copied()).collect())
        .collect();
    let rel = Relation::from_numeric_rows("R", &name_refs, &rows)
        .map_err(|e| ModelError::InvalidInstance(e.to_string()))?;
    let query = PackageQuery {
        package_of: vec!["R".into()],
        package_name: "P".into(),
        relation_name: "R".into(),
        relation_alias: "R".into(),
        repeat: None,
        base_predicate: None,
        global_predicates: (0..ilp.k)
            .map(|j| GlobalPredicate {
                lhs: AggregateExpr::Sum(constraint_attr(j)),
                bound: Bound::Cmp(GlobalOp::Le, ilp.c[j]),
            })
            .collect(),
        objective: Some(Objective {
            sense: Sense::Maximize,
            expr: AggregateExpr::Sum(OBJECTIVE_ATTR.into()),
        }),
    };
    Ok((rel, query))
}
