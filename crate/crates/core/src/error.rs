use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while loading or querying a [`Relation`](crate::relation::Relation).
#[derive(Debug, Error)]
pub enum RelationError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row} has {found} fields, header has {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("duplicate attribute name `{0}`")]
    DuplicateAttribute(String),
    #[error("empty attribute name at column {0}")]
    EmptyAttributeName(usize),
    #[error("schema must have at least one attribute")]
    EmptySchema,
    #[error("row {row}, column `{attr}`: non-finite numeric value `{value}`")]
    NonFinite {
        row: usize,
        attr: String,
        value: String,
    },
    #[error("row {row}, column `{attr}`: empty value in numeric column")]
    MissingValue { row: usize, attr: String },
    #[error("row {row}, column `{attr}`: `{value}` is not a number")]
    NotNumeric {
        row: usize,
        attr: String,
        value: String,
    },
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("attribute `{attr}` is {found}, expected {expected}")]
    KindMismatch {
        attr: String,
        expected: &'static str,
        found: &'static str,
    },
    #[error("operator `{op}` is not supported on categorical attribute `{attr}`")]
    UnsupportedCategoricalOp { attr: String, op: String },
    #[error("relation is empty")]
    EmptyRelation,
    #[error("tuple has {found} values, schema has {expected}")]
    ArityMismatch { expected: usize, found: usize },
}

/// Top-level error for the evaluation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Relation(#[from] RelationError),
    #[error(transparent)]
    Parse(#[from] crate::paql::ParseError),
    #[error(transparent)]
    Validate(#[from] crate::paql::ValidationError),
    #[error(transparent)]
    Model(#[from] crate::ilp::ModelError),
    #[error(transparent)]
    Solver(#[from] crate::solver::SolverError),
    #[error(transparent)]
    Partition(#[from] crate::partition::PartitionError),
    #[error(transparent)]
    Eval(#[from] crate::eval::EvalError),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
