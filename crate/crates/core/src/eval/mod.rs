//! Package evaluation: Direct (one ILP over the whole relation) and
//! SketchRefine (solve over group representatives, then refine group by
//! group with greedy backtracking).

mod sketch_refine;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ilp::{derive_bounds, feasible, translate, translate_over};
use crate::paql::{CheckedQuery, Sense};
use crate::relation::Relation;
use crate::solver::{BranchAndBound, SolveStatus, Solver, SolverConfig};

pub use sketch_refine::{build_refine_model, build_sketch_model, eval_sketchrefine, hybrid_sketch, HybridOutcome, SketchModel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("solver objective {solver} differs from recomputed package objective {recomputed}")]
    ObjectiveMismatch { solver: f64, recomputed: f64 },
    #[error("solver reported an unbounded relaxation on a bounded model")]
    Unbounded,
    #[error("{which} report is not feasible")]
    NotFeasible { which: &'static str },
    #[error("approximation ratio has a zero denominator")]
    ZeroDenominator,
}

/// Evaluation settings shared by both methods.
#[derive(Clone)]
pub struct EvalConfig {
    pub solver: Arc<dyn Solver>,
    /// Budget for the whole evaluation, shared by all subproblem solves.
    pub time_limit: Duration,
    /// Cap on refine solves per sketch-refine pass; `None` is `10·m`.
    pub backtrack_limit: Option<u64>,
    pub hybrid_sketch: bool,
    /// Subproblems with more variables than this are themselves solved by
    /// sketch-refine; `None` uses the partitioning's `tau`.
    pub recursion_threshold: Option<usize>,
    /// Branch-and-bound node cap for each sketch-refine subproblem. When it
    /// is reached the best package found so far is used; without one the
    /// subproblem counts as failed. `None` solves every subproblem to
    /// optimality. Direct ignores it.
    pub subproblem_node_limit: Option<u64>,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            solver: Arc::new(BranchAndBound),
            time_limit: Duration::from_secs(3600),
            backtrack_limit: None,
            hybrid_sketch: true,
            recursion_threshold: None,
            subproblem_node_limit: Some(10_000),
            seed: 0,
        }
    }
}

impl std::fmt::Debug for EvalConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EvalConfig")
            .field("solver", &self.solver.name())
            .field("time_limit", &self.time_limit)
            .field("backtrack_limit", &self.backtrack_limit)
            .field("hybrid_sketch", &self.hybrid_sketch)
            .field("recursion_threshold", &self.recursion_threshold)
            .field("subproblem_node_limit", &self.subproblem_node_limit)
            .field("seed", &self.seed)
            .finish()
    }
}

impl EvalConfig {
    pub(crate) fn solver_config(&self, remaining: Duration) -> SolverConfig {
        SolverConfig {
            time_limit: remaining,
            seed: self.seed,
            ..SolverConfig::default()
        }
    }
}

/// A multiset of tuple ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Package {
    pub entries: BTreeMap<usize, u64>,
    /// Objective recomputed by aggregation over the entries.
    pub objective_value: f64,
}

impl Package {
    pub fn from_pairs(q: &CheckedQuery, rel: &Relation, pairs: impl IntoIterator<Item = (usize, u64)>) -> Package {
        let mut entries = BTreeMap::new();
        for (id, m) in pairs {
            if m > 0 {
                *entries.entry(id).or_insert(0) += m;
            }
        }
        let mut p = Package {
            entries,
            objective_value: 0.0,
        };
        p.objective_value = objective_of(q, rel, &p);
        p
    }

    /// Total number of tuples, counting repetitions.
    pub fn len(&self) -> u64 {
        self.entries.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.entries.iter().map(|(&id, &m)| (id, m))
    }
}

/// Objective of `q` over `pkg` by direct aggregation; `0` without an
/// objective.
pub fn objective_of(q: &CheckedQuery, rel: &Relation, pkg: &Package) -> f64 {
    q.objective
        .as_ref()
        .and_then(|o| o.expr.evaluate(rel, pkg.iter()))
        .unwrap_or(0.0)
}

/// Whether `pkg` answers `q`: every tuple passes the base predicate,
/// repetition stays within `REPEAT`, and the translated model accepts it.
pub fn package_is_feasible(q: &CheckedQuery, rel: &Relation, pkg: &Package) -> crate::Result<bool> {
    if pkg.entries.keys().any(|&id| id >= rel.len()) {
        return Ok(false);
    }
    if let Some(base) = &q.base {
        if pkg.entries.keys().any(|&id| !base.matches(rel, id)) {
            return Ok(false);
        }
    }
    if let Some(k) = q.repeat {
        if pkg.entries.values().any(|&m| m > k.saturating_add(1)) {
            return Ok(false);
        }
    }
    let ids: Vec<usize> = pkg.entries.keys().copied().collect();
    let x: Vec<u64> = pkg.entries.values().copied().collect();
    Ok(feasible(&translate_over(q, rel, &ids), &x)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    SketchRefine,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Direct => "direct",
            Method::SketchRefine => "sketchrefine",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalStatus {
    Feasible,
    Infeasible,
    TimeLimit,
}

impl std::fmt::Display for EvalStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EvalStatus::Feasible => "feasible",
            EvalStatus::Infeasible => "infeasible",
            EvalStatus::TimeLimit => "time_limit",
        })
    }
}

/// Wall times in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Timings {
    pub translate: f64,
    /// Sum over all solver calls.
    pub solve: f64,
    pub sketch: f64,
    pub refine: f64,
    /// Translation and solving, excluding package materialization.
    pub total: f64,
}

pub(crate) fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub method: Method,
    pub status: EvalStatus,
    /// Present exactly when `status` is `Feasible`.
    pub package: Option<Package>,
    pub timings: Timings,
    pub backtracks: u64,
    /// Number of solver calls.
    pub subproblems: u64,
    pub flags: BTreeSet<String>,
}

/// The JSON form of an [`EvalReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReportJson {
    pub method: Method,
    pub status: EvalStatus,
    pub objective: Option<f64>,
    pub package: Vec<(usize, u64)>,
    pub timings_ms: Timings,
    pub backtracks: u64,
    pub subproblems: u64,
    pub flags: Vec<String>,
}

impl EvalReport {
    pub(crate) fn new(method: Method, status: EvalStatus) -> Self {
        EvalReport {
            method,
            status,
            package: None,
            timings: Timings::default(),
            backtracks: 0,
            subproblems: 0,
            flags: BTreeSet::new(),
        }
    }

    pub fn objective(&self) -> Option<f64> {
        self.package.as_ref().map(|p| p.objective_value)
    }

    pub fn to_json(&self) -> EvalReportJson {
        EvalReportJson {
            method: self.method,
            status: self.status,
            objective: self.objective(),
            package: self.package.as_ref().map(|p| p.iter().collect()).unwrap_or_default(),
            timings_ms: self.timings,
            backtracks: self.backtracks,
            subproblems: self.subproblems,
            flags: self.flags.iter().cloned().collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("report serializes")
    }
}

fn objectives_agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-6 * a.abs().max(b.abs()).max(1.0)
}

/// Translates the whole query into one ILP and solves it.
pub fn eval_direct(q: &CheckedQuery, rel: &Relation, cfg: &EvalConfig) -> crate::Result<EvalReport> {
    let start = Instant::now();
    let model = derive_bounds(&translate(q, rel))?;
    let translated = start.elapsed();
    let result = cfg.solver.solve(&model, &cfg.solver_config(cfg.time_limit.saturating_sub(translated)))?;
    let elapsed = start.elapsed();
    let solve_time = elapsed - translated;
    let mut report = EvalReport::new(Method::Direct, EvalStatus::Infeasible);
    report.subproblems = 1;
    match result.status {
        SolveStatus::Optimal => {
            let x = result.solution.expect("optimal result has a solution");
            let pkg = Package::from_pairs(q, rel, model.package_of(&x));
            let solver_obj = result.objective.unwrap_or(0.0);
            if !objectives_agree(solver_obj, pkg.objective_value) {
                return Err(EvalError::ObjectiveMismatch {
                    solver: solver_obj,
                    recomputed: pkg.objective_value,
                }
                .into());
            }
            report.status = EvalStatus::Feasible;
            report.package = Some(pkg);
        }
        SolveStatus::Infeasible => {}
        SolveStatus::TimeLimit => {
            report.status = EvalStatus::TimeLimit;
            if result.solution.is_some() {
                report.flags.insert("incumbent_discarded".into());
            }
        }
        SolveStatus::Unbounded => return Err(EvalError::Unbounded.into()),
    }
    report.timings = Timings {
        translate: ms(translated),
        solve: ms(solve_time),
        sketch: 0.0,
        refine: 0.0,
        total: ms(elapsed),
    };
    Ok(report)
}

/// `Obj_D / Obj_S` when maximizing, `Obj_S / Obj_D` when minimizing.
pub fn approximation_ratio(direct: &EvalReport, sr: &EvalReport, sense: Sense) -> Result<f64, EvalError> {
    let d = direct.objective().ok_or(EvalError::NotFeasible { which: "direct" })?;
    let s = sr.objective().ok_or(EvalError::NotFeasible { which: "sketchrefine" })?;
    ratio_of(d, s, sense)
}

/// The ratio formula on raw objective values.
pub fn ratio_of(direct: f64, sr: f64, sense: Sense) -> Result<f64, EvalError> {
    let (num, den) = match sense {
        Sense::Maximize => (direct, sr),
        Sense::Minimize => (sr, direct),
    };
    if num == den {
        return Ok(1.0);
    }
    if den == 0.0 {
        return Err(EvalError::ZeroDenominator);
    }
    Ok(num / den)
}
