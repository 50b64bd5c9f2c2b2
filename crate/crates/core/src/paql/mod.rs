//! PaQL: parsing, pretty-printing and schema validation of package queries.

mod ast;
mod lexer;
mod parser;
mod validate;

use std::fmt;

use thiserror::Error;

pub use ast::{AggregateExpr, Bound, GlobalOp, GlobalPredicate, Objective, PackageQuery, Sense};
pub use parser::parse;
pub use validate::{
    validate, CheckedConstraint, CheckedObjective, CheckedQuery, CheckedRhs, LinearAggregate,
    ValidationError,
};

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnsupportedJoin,
    StrictGlobalInequality,
    NonLinear,
    Disjunction,
    UnsupportedAggregate(String),
    UnknownQualifier(String),
    EmptyRange { lo: f64, hi: f64 },
    Unsupported(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax(msg) => f.write_str(msg),
            ParseErrorKind::UnsupportedJoin => f.write_str("unsupported: joins"),
            ParseErrorKind::StrictGlobalInequality => {
                f.write_str("unsupported: strict global inequality")
            }
            ParseErrorKind::NonLinear => f.write_str("unsupported: non-linear expression"),
            ParseErrorKind::Disjunction => f.write_str("unsupported: OR (only conjunctions)"),
            ParseErrorKind::UnsupportedAggregate(a) => write!(f, "unsupported aggregate `{a}`"),
            ParseErrorKind::UnknownQualifier(q) => write!(f, "unknown qualifier `{q}`"),
            ParseErrorKind::EmptyRange { lo, hi } => {
                write!(f, "BETWEEN lower bound {lo} exceeds upper bound {hi}")
            }
            ParseErrorKind::Unsupported(what) => write!(f, "unsupported: {what}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub(crate) fn new(line: usize, column: usize, kind: ParseErrorKind) -> Self {
        ParseError { line, column, kind }
    }
}
