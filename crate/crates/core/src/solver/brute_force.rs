use std::time::Instant;

use super::{finite_uppers, SolveResult, SolveStats, SolveStatus, Solver, SolverConfig, SolverError};
use crate::ilp::IlpModel;
use crate::paql::Sense;

pub const MAX_SEARCH_SPACE: f64 = 1e7;

/// Exhaustive enumeration oracle. Ignores time and node limits.
#[derive(Debug, Clone, Copy, Default)]
pub struct BruteForce;

impl Solver for BruteForce {
    fn name(&self) -> &'static str {
        "brute-force"
    }

    fn solve(&self, model: &IlpModel, _cfg: &SolverConfig) -> Result<SolveResult, SolverError> {
        brute_force(model)
    }
}

/// Number of integer vectors within the variable bounds.
pub fn search_space(model: &IlpModel) -> Result<f64, SolverError> {
    let uppers = finite_uppers(model)?;
    Ok(model
        .variables
        .iter()
        .zip(&uppers)
        .map(|(v, &u)| if u < v.lower { 0.0 } else { (u - v.lower) as f64 + 1.0 })
        .product())
}

/// Enumerates every vector within the bounds (odometer order, variable 0
/// fastest) and keeps the first best feasible one.
pub fn brute_force(model: &IlpModel) -> Result<SolveResult, SolverError> {
    let start = Instant::now();
    let size = search_space(model)?;
    if size > MAX_SEARCH_SPACE {
        return Err(SolverError::SearchSpaceTooLarge {
            size,
            limit: MAX_SEARCH_SPACE,
        });
    }
    let uppers = finite_uppers(model)?;
    let mut stats = SolveStats::default();
    if size == 0.0 {
        stats.wall_time = start.elapsed();
        return Ok(SolveResult::infeasible(stats));
    }
    let n = model.num_vars();
    let lower: Vec<u64> = model.variables.iter().map(|v| v.lower).collect();
    let mut x = lower.clone();
    let mut best: Option<(Vec<u64>, f64)> = None;
    let better = |v: f64, b: f64| match model.sense {
        Sense::Maximize => v > b,
        Sense::Minimize => v < b,
    };
    // running left-hand sides, screened with a loose tolerance and confirmed
    // exactly before a vector is accepted
    let mut lhs: Vec<f64> = model.constraints.iter().map(|c| c.lhs(&x)).collect();
    let scale: Vec<f64> = model
        .constraints
        .iter()
        .map(|c| {
            let reach: f64 = c.coefficients.iter().zip(&uppers).map(|(a, &u)| a.abs() * u as f64).sum();
            1e-6 * (reach + c.rhs.abs()).max(1.0)
        })
        .collect();
    loop {
        stats.nodes += 1;
        let plausible = model
            .constraints
            .iter()
            .zip(&lhs)
            .zip(&scale)
            .all(|((c, &l), &tol)| c.op.holds(l, c.rhs, tol));
        if plausible && model.constraints.iter().all(|c| c.satisfied_by(&x)) {
            let v = model.objective_value(&x);
            if best.as_ref().is_none_or(|(_, b)| better(v, *b)) {
                best = Some((x.clone(), v));
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                stats.wall_time = start.elapsed();
                return Ok(match best {
                    Some((x, v)) => SolveResult {
                        status: SolveStatus::Optimal,
                        solution: Some(x),
                        objective: Some(v),
                        stats,
                    },
                    None => SolveResult::infeasible(stats),
                });
            }
            if x[i] < uppers[i] {
                x[i] += 1;
                for (l, c) in lhs.iter_mut().zip(&model.constraints) {
                    *l += c.coefficients[i];
                }
                break;
            }
            let steps = (x[i] - lower[i]) as f64;
            x[i] = lower[i];
            if steps > 0.0 {
                for (l, c) in lhs.iter_mut().zip(&model.constraints) {
                    *l -= steps * c.coefficients[i];
                }
            }
            i += 1;
        }
    }
}
