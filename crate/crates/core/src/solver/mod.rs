//! Exact ILP solving: LP-relaxation branch-and-bound, plus an exhaustive
//! enumeration oracle, behind the [`Solver`] trait.

mod branch_bound;
mod brute_force;
mod simplex;

use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ilp::IlpModel;

pub use branch_bound::BranchAndBound;
pub use brute_force::{brute_force, search_space, BruteForce, MAX_SEARCH_SPACE};
pub use simplex::{lp_relax, LpRelaxation, LpStatus};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("variable {var} has no finite upper bound")]
    InfiniteBound { var: usize },
    #[error("search space of {size:e} vectors exceeds the enumeration limit of {limit:e}")]
    SearchSpaceTooLarge { size: f64, limit: f64 },
    #[error("numerical singularity: basis matrix is singular")]
    NumericalSingularity,
    #[error("simplex iteration limit ({0}) reached")]
    IterationLimit(u64),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub time_limit: Duration,
    pub integrality_tol: f64,
    pub feasibility_tol: f64,
    pub node_limit: Option<u64>,
    /// 0 breaks branching ties by lowest variable index; any other value
    /// by a permutation drawn from this seed.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            time_limit: Duration::from_secs(3600),
            integrality_tol: 1e-6,
            feasibility_tol: 1e-9,
            node_limit: None,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn check(&self) -> Result<(), SolverError> {
        if !(self.integrality_tol > 0.0 && self.feasibility_tol > 0.0) {
            return Err(SolverError::InvalidConfig("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Time or node limit reached. The best solution found so far, if any,
    /// is still reported.
    TimeLimit,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::TimeLimit => "time_limit",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveStats {
    pub nodes: u64,
    pub lp_iterations: u64,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub solution: Option<Vec<u64>>,
    pub objective: Option<f64>,
    pub stats: SolveStats,
}

impl SolveResult {
    pub(crate) fn infeasible(stats: SolveStats) -> Self {
        SolveResult {
            status: SolveStatus::Infeasible,
            solution: None,
            objective: None,
            stats,
        }
    }
}

/// A black-box ILP solver. Implementations must be deterministic for a
/// fixed model and configuration.
pub trait Solver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, model: &IlpModel, cfg: &SolverConfig) -> Result<SolveResult, SolverError>;
}

/// Solves `model` exactly with [`BranchAndBound`].
pub fn solve(model: &IlpModel, cfg: &SolverConfig) -> Result<SolveResult, SolverError> {
    BranchAndBound.solve(model, cfg)
}

pub(crate) fn finite_uppers(model: &IlpModel) -> Result<Vec<u64>, SolverError> {
    model
        .variables
        .iter()
        .enumerate()
        .map(|(var, v)| v.upper.ok_or(SolverError::InfiniteBound { var }))
        .collect()
}

#[cfg(test)]
mod tests;
