//! Conjunctive per-tuple selection predicates (`attr op constant`).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::RelationError;
use crate::relation::{AttrKind, Column, Relation, Schema};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "<>",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    /// The operator obtained by swapping the operands (`a < b` ⇔ `b > a`).
    pub fn flipped(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
            op => op,
        }
    }

    fn is_equality(self) -> bool {
        matches!(self, CmpOp::Eq | CmpOp::Ne)
    }

    pub fn holds<T: PartialOrd + ?Sized>(self, lhs: &T, rhs: &T) -> bool {
        match self {
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Literal {
    Num(f64),
    Str(String),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Num(v) => write!(f, "{v}"),
            Literal::Str(s) => write!(f, "'{}'", s.replace('\'', "''")),
        }
    }
}

/// A possibly qualified column reference such as `R.kcal` or `kcal`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ColumnRef {
    pub qualifier: Option<String>,
    pub name: String,
}

impl ColumnRef {
    pub fn bare(name: impl Into<String>) -> Self {
        ColumnRef {
            qualifier: None,
            name: name.into(),
        }
    }

    pub fn qualified(qualifier: impl Into<String>, name: impl Into<String>) -> Self {
        ColumnRef {
            qualifier: Some(qualifier.into()),
            name: name.into(),
        }
    }
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.qualifier {
            Some(q) => write!(f, "{q}.{}", self.name),
            None => f.write_str(&self.name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub column: ColumnRef,
    pub op: CmpOp,
    pub value: Literal,
}

/// A conjunction of comparisons. The empty conjunction is `true`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BasePredicate {
    pub terms: Vec<Comparison>,
}

impl BasePredicate {
    pub fn new(terms: Vec<Comparison>) -> Self {
        BasePredicate { terms }
    }

    pub fn is_trivial(&self) -> bool {
        self.terms.is_empty()
    }

    /// Resolves attribute names against the relation schema and checks types.
    /// Qualifiers are not checked here; query validation does that.
    pub fn resolve(&self, schema: &Schema) -> Result<ResolvedPredicate, RelationError> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for term in &self.terms {
            let attr = schema
                .index_of(&term.column.name)
                .ok_or_else(|| RelationError::UnknownAttribute(term.column.name.clone()))?;
            let kind = schema.attributes()[attr].kind;
            let value = match (&term.value, kind) {
                (Literal::Num(v), AttrKind::Numeric) => ResolvedLiteral::Num(*v),
                (Literal::Str(s), AttrKind::Categorical) => {
                    if !term.op.is_equality() {
                        return Err(RelationError::UnsupportedCategoricalOp {
                            attr: term.column.name.clone(),
                            op: term.op.symbol().to_string(),
                        });
                    }
                    ResolvedLiteral::Str(s.clone())
                }
                (Literal::Str(_), AttrKind::Numeric) => {
                    return Err(RelationError::KindMismatch {
                        attr: term.column.name.clone(),
                        expected: "categorical",
                        found: "numeric",
                    })
                }
                (Literal::Num(_), AttrKind::Categorical) => {
                    return Err(RelationError::KindMismatch {
                        attr: term.column.name.clone(),
                        expected: "numeric",
                        found: "categorical",
                    })
                }
            };
            terms.push(ResolvedComparison {
                attr,
                op: term.op,
                value,
            });
        }
        Ok(ResolvedPredicate { terms })
    }
}

impl fmt::Display for BasePredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" AND ")?;
            }
            write!(f, "{} {} {}", t.column, t.op, t.value)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ResolvedLiteral {
    Num(f64),
    Str(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedComparison {
    pub attr: usize,
    pub op: CmpOp,
    pub value: ResolvedLiteral,
}

/// A predicate bound to attribute positions of one schema.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResolvedPredicate {
    pub terms: Vec<ResolvedComparison>,
}

impl ResolvedPredicate {
    pub fn matches(&self, rel: &Relation, id: usize) -> bool {
        self.terms.iter().all(|t| match (&rel.columns()[t.attr], &t.value) {
            (Column::Numeric(vals), ResolvedLiteral::Num(v)) => t.op.holds(&vals[id], v),
            (Column::Categorical(vals), ResolvedLiteral::Str(s)) => {
                t.op.holds(vals[id].as_str(), s.as_str())
            }
            // resolve() never produces mismatched pairs
            _ => false,
        })
    }

    /// Ids of all tuples satisfying the predicate, ascending.
    pub fn filter(&self, rel: &Relation) -> Vec<usize> {
        (0..rel.len()).filter(|&id| self.matches(rel, id)).collect()
    }
}
