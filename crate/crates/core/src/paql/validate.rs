use thiserror::Error;

use super::ast::{AggregateExpr, Bound, GlobalOp, PackageQuery, Sense};
use crate::error::RelationError;
use crate::predicate::ResolvedPredicate;
use crate::relation::{AttrKind, Relation, Schema};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("aggregate over categorical attribute `{0}`")]
    CategoricalAggregate(String),
    #[error("unsupported: joins (PACKAGE lists {0} relations)")]
    MultipleRelations(usize),
    #[error("PACKAGE({alias}) does not name the FROM relation alias `{expected}`")]
    UnknownAlias { alias: String, expected: String },
    #[error("unsupported: only two filtered counts may be compared with each other")]
    AggregateComparison,
    #[error("unsupported: AVG objective is not linear")]
    AvgObjective,
    #[error("predicate: {0}")]
    Predicate(String),
}

impl From<RelationError> for ValidationError {
    fn from(e: RelationError) -> Self {
        match e {
            RelationError::UnknownAttribute(a) => ValidationError::UnknownAttribute(a),
            other => ValidationError::Predicate(other.to_string()),
        }
    }
}

/// A package aggregate whose value over a package `x` is linear in `x`
/// (AVG is linearized per constraint, see [`CheckedConstraint::coefficient`]).
#[derive(Debug, Clone, PartialEq)]
pub enum LinearAggregate {
    Count,
    Sum(usize),
    Avg(usize),
    FilteredCount(ResolvedPredicate),
}

impl LinearAggregate {
    /// Contribution of one copy of tuple `id` to COUNT/SUM/filtered COUNT;
    /// for AVG, the attribute value.
    pub fn tuple_value(&self, rel: &Relation, id: usize) -> f64 {
        match self {
            LinearAggregate::Count => 1.0,
            LinearAggregate::Sum(a) | LinearAggregate::Avg(a) => rel.numeric(*a).expect("numeric")[id],
            LinearAggregate::FilteredCount(p) => {
                if p.matches(rel, id) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Aggregate value over a package given as `(tuple id, multiplicity)`
    /// pairs. AVG over the empty package is `None`.
    pub fn evaluate<I>(&self, rel: &Relation, package: I) -> Option<f64>
    where
        I: IntoIterator<Item = (usize, u64)>,
    {
        let (mut total, mut count) = (0.0, 0u64);
        for (id, m) in package {
            total += self.tuple_value(rel, id) * m as f64;
            count += m;
        }
        match self {
            LinearAggregate::Avg(_) if count == 0 => None,
            LinearAggregate::Avg(_) => Some(total / count as f64),
            _ => Some(total),
        }
    }

    pub fn attribute(&self) -> Option<usize> {
        match self {
            LinearAggregate::Sum(a) | LinearAggregate::Avg(a) => Some(*a),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CheckedRhs {
    Const(f64),
    Aggregate(LinearAggregate),
}

/// One linear constraint derived from a global predicate. `BETWEEN` is
/// lowered to a `>=` and a `<=` constraint sharing the same `source`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckedConstraint {
    pub lhs: LinearAggregate,
    pub op: GlobalOp,
    pub rhs: CheckedRhs,
    /// Index of the originating global predicate.
    pub source: usize,
}

impl CheckedConstraint {
    /// Coefficient of one copy of tuple `id` in the linearized constraint
    /// `Σ coefficient·x  op  rhs_value()`.
    pub fn coefficient(&self, rel: &Relation, id: usize) -> f64 {
        match (&self.lhs, &self.rhs) {
            (LinearAggregate::Avg(_), CheckedRhs::Const(v)) => self.lhs.tuple_value(rel, id) - v,
            (lhs, CheckedRhs::Const(_)) => lhs.tuple_value(rel, id),
            (lhs, CheckedRhs::Aggregate(rhs)) => lhs.tuple_value(rel, id) - rhs.tuple_value(rel, id),
        }
    }

    pub fn rhs_value(&self) -> f64 {
        match (&self.lhs, &self.rhs) {
            (LinearAggregate::Avg(_), _) | (_, CheckedRhs::Aggregate(_)) => 0.0,
            (_, CheckedRhs::Const(v)) => *v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckedObjective {
    pub sense: Sense,
    pub expr: LinearAggregate,
}

/// A query resolved against a schema.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckedQuery {
    pub query: PackageQuery,
    pub repeat: Option<u64>,
    pub base: Option<ResolvedPredicate>,
    pub constraints: Vec<CheckedConstraint>,
    pub objective: Option<CheckedObjective>,
    /// Numeric attributes referenced by global predicates or the objective,
    /// ascending and deduplicated.
    pub numeric_attrs: Vec<usize>,
}

impl CheckedQuery {
    pub fn sense(&self) -> Sense {
        self.objective.as_ref().map_or(Sense::Maximize, |o| o.sense)
    }

    /// Objective coefficient of one copy of tuple `id` (0 for the vacuous
    /// objective).
    pub fn objective_coefficient(&self, rel: &Relation, id: usize) -> f64 {
        self.objective
            .as_ref()
            .map_or(0.0, |o| o.expr.tuple_value(rel, id))
    }
}

fn numeric_attr(schema: &Schema, name: &str) -> Result<usize, ValidationError> {
    let i = schema
        .index_of(name)
        .ok_or_else(|| ValidationError::UnknownAttribute(name.to_string()))?;
    match schema.attributes()[i].kind {
        AttrKind::Numeric => Ok(i),
        AttrKind::Categorical => Err(ValidationError::CategoricalAggregate(name.to_string())),
    }
}

fn resolve_aggregate(schema: &Schema, expr: &AggregateExpr) -> Result<LinearAggregate, ValidationError> {
    Ok(match expr {
        AggregateExpr::CountStar => LinearAggregate::Count,
        AggregateExpr::Sum(a) => LinearAggregate::Sum(numeric_attr(schema, a)?),
        AggregateExpr::Avg(a) => LinearAggregate::Avg(numeric_attr(schema, a)?),
        AggregateExpr::FilteredCount(p) => LinearAggregate::FilteredCount(p.resolve(schema)?),
    })
}

/// Resolves every attribute reference of `q` against `schema`, lowers
/// `BETWEEN` and checks the single-relation restriction.
pub fn validate(q: &PackageQuery, schema: &Schema) -> Result<CheckedQuery, ValidationError> {
    if q.package_of.len() > 1 {
        return Err(ValidationError::MultipleRelations(q.package_of.len()));
    }
    if let Some(alias) = q.package_of.first() {
        if *alias != q.relation_alias && *alias != q.relation_name {
            return Err(ValidationError::UnknownAlias {
                alias: alias.clone(),
                expected: q.relation_alias.clone(),
            });
        }
    }
    let base = q
        .base_predicate
        .as_ref()
        .map(|p| p.resolve(schema))
        .transpose()?;

    let mut constraints = Vec::new();
    for (source, g) in q.global_predicates.iter().enumerate() {
        let lhs = resolve_aggregate(schema, &g.lhs)?;
        match &g.bound {
            Bound::Cmp(op, v) => constraints.push(CheckedConstraint {
                lhs,
                op: *op,
                rhs: CheckedRhs::Const(*v),
                source,
            }),
            Bound::Between(lo, hi) => {
                constraints.push(CheckedConstraint {
                    lhs: lhs.clone(),
                    op: GlobalOp::Ge,
                    rhs: CheckedRhs::Const(*lo),
                    source,
                });
                constraints.push(CheckedConstraint {
                    lhs,
                    op: GlobalOp::Le,
                    rhs: CheckedRhs::Const(*hi),
                    source,
                });
            }
            Bound::Aggregate(op, rhs) => {
                let rhs = resolve_aggregate(schema, rhs)?;
                if !matches!(
                    (&lhs, &rhs),
                    (LinearAggregate::FilteredCount(_), LinearAggregate::FilteredCount(_))
                ) {
                    return Err(ValidationError::AggregateComparison);
                }
                constraints.push(CheckedConstraint {
                    lhs,
                    op: *op,
                    rhs: CheckedRhs::Aggregate(rhs),
                    source,
                });
            }
        }
    }

    let objective = match &q.objective {
        Some(o) => {
            let expr = resolve_aggregate(schema, &o.expr)?;
            if matches!(expr, LinearAggregate::Avg(_)) {
                return Err(ValidationError::AvgObjective);
            }
            Some(CheckedObjective {
                sense: o.sense,
                expr,
            })
        }
        None => None,
    };

    let mut numeric_attrs: Vec<usize> = constraints
        .iter()
        .flat_map(|c| {
            let r = match &c.rhs {
                CheckedRhs::Aggregate(a) => a.attribute(),
                CheckedRhs::Const(_) => None,
            };
            [c.lhs.attribute(), r]
        })
        .chain([objective.as_ref().and_then(|o| o.expr.attribute())])
        .flatten()
        .collect();
    numeric_attrs.sort_unstable();
    numeric_attrs.dedup();

    Ok(CheckedQuery {
        query: q.clone(),
        repeat: q.repeat,
        base,
        constraints,
        objective,
        numeric_attrs,
    })
}
