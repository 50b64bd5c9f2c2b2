use std::fmt;

use serde::{Deserialize, Serialize};

use crate::predicate::BasePredicate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    pub fn keyword(self) -> &'static str {
        match self {
            Sense::Minimize => "MINIMIZE",
            Sense::Maximize => "MAXIMIZE",
        }
    }
}

/// Comparison allowed in a global predicate. Strict inequalities are
/// rejected by the parser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GlobalOp {
    Le,
    Ge,
    Eq,
}

impl GlobalOp {
    pub fn symbol(self) -> &'static str {
        match self {
            GlobalOp::Le => "<=",
            GlobalOp::Ge => ">=",
            GlobalOp::Eq => "=",
        }
    }

    pub fn flipped(self) -> GlobalOp {
        match self {
            GlobalOp::Le => GlobalOp::Ge,
            GlobalOp::Ge => GlobalOp::Le,
            GlobalOp::Eq => GlobalOp::Eq,
        }
    }

    /// `lhs op rhs` with an absolute slack `tol`.
    pub fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            GlobalOp::Le => lhs <= rhs + tol,
            GlobalOp::Ge => lhs >= rhs - tol,
            GlobalOp::Eq => (lhs - rhs).abs() <= tol,
        }
    }
}

impl fmt::Display for GlobalOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// An aggregate over the package. Attribute names are stored unqualified;
/// the parser checks that qualifiers name the package.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AggregateExpr {
    CountStar,
    Sum(String),
    Avg(String),
    /// `(SELECT COUNT(*) FROM P WHERE filter)`
    FilteredCount(BasePredicate),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Bound {
    Cmp(GlobalOp, f64),
    Between(f64, f64),
    /// Comparison against another aggregate, e.g. two filtered counts.
    Aggregate(GlobalOp, AggregateExpr),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalPredicate {
    pub lhs: AggregateExpr,
    pub bound: Bound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub sense: Sense,
    pub expr: AggregateExpr,
}

/// A parsed PaQL query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackageQuery {
    /// Aliases listed inside `PACKAGE(...)`.
    pub package_of: Vec<String>,
    pub package_name: String,
    pub relation_name: String,
    pub relation_alias: String,
    /// `None` means unlimited repetition.
    pub repeat: Option<u64>,
    pub base_predicate: Option<BasePredicate>,
    pub global_predicates: Vec<GlobalPredicate>,
    pub objective: Option<Objective>,
}

struct AggDisplay<'a> {
    expr: &'a AggregateExpr,
    package: &'a str,
}

impl fmt::Display for AggDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.package;
        match self.expr {
            AggregateExpr::CountStar => write!(f, "COUNT({p}.*)"),
            AggregateExpr::Sum(a) => write!(f, "SUM({p}.{a})"),
            AggregateExpr::Avg(a) => write!(f, "AVG({p}.{a})"),
            AggregateExpr::FilteredCount(pred) => {
                write!(f, "(SELECT COUNT(*) FROM {p}")?;
                if !pred.is_trivial() {
                    f.write_str(" WHERE ")?;
                    write_predicate(f, pred, p)?;
                }
                f.write_str(")")
            }
        }
    }
}

fn write_predicate(f: &mut fmt::Formatter<'_>, pred: &BasePredicate, qualifier: &str) -> fmt::Result {
    for (i, t) in pred.terms.iter().enumerate() {
        if i > 0 {
            f.write_str(" AND ")?;
        }
        write!(f, "{qualifier}.{} {} {}", t.column.name, t.op, t.value)?;
    }
    Ok(())
}

impl PackageQuery {
    pub fn display_aggregate<'a>(&'a self, expr: &'a AggregateExpr) -> impl fmt::Display + 'a {
        AggDisplay {
            expr,
            package: &self.package_name,
        }
    }
}

/// Canonical PaQL text; reparses to an equal AST.
impl fmt::Display for PackageQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "SELECT PACKAGE({}) AS {}",
            self.package_of.join(", "),
            self.package_name
        )?;
        write!(f, "FROM {} {}", self.relation_name, self.relation_alias)?;
        if let Some(k) = self.repeat {
            write!(f, " REPEAT {k}")?;
        }
        writeln!(f)?;
        if let Some(pred) = &self.base_predicate {
            f.write_str("WHERE ")?;
            write_predicate(f, pred, &self.relation_alias)?;
            writeln!(f)?;
        }
        if !self.global_predicates.is_empty() {
            f.write_str("SUCH THAT\n")?;
            for (i, g) in self.global_predicates.iter().enumerate() {
                f.write_str(if i == 0 { "    " } else { "    AND " })?;
                let lhs = self.display_aggregate(&g.lhs);
                match &g.bound {
                    Bound::Cmp(op, v) => write!(f, "{lhs} {op} {v}")?,
                    Bound::Between(lo, hi) => write!(f, "{lhs} BETWEEN {lo} AND {hi}")?,
                    Bound::Aggregate(op, rhs) => {
                        write!(f, "{lhs} {op} {}", self.display_aggregate(rhs))?
                    }
                }
                writeln!(f)?;
            }
        }
        if let Some(obj) = &self.objective {
            writeln!(
                f,
                "{} {}",
                obj.sense.keyword(),
                self.display_aggregate(&obj.expr)
            )?;
        }
        Ok(())
    }
}
