//! Package queries: PaQL parsing, translation to integer linear programs,
//! exact solving, quad-tree partitioning and SketchRefine evaluation.

pub mod bench;
pub mod error;
pub mod eval;
pub mod ilp;
pub mod paql;
pub mod partition;
pub mod predicate;
pub mod relation;
pub mod solver;
pub mod workload;

pub use error::{Error, RelationError, Result};
pub use ilp::{derive_bounds, feasible, translate, IlpModel, LinearConstraint, Variable};
pub use paql::{parse, validate, CheckedQuery, PackageQuery};
pub use relation::{AttrKind, Attribute, Relation, Schema};
pub use solver::{brute_force, solve, SolveResult, SolveStatus, Solver, SolverConfig};
pub use eval::{eval_direct, eval_sketchrefine, EvalConfig, EvalReport, EvalStatus, Method, Package};
pub use partition::{partition, partition_for_epsilon, PartitionParams, Partitioning};
