use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::simplex::{LpData, LpStatus};
use super::{finite_uppers, SolveResult, SolveStats, SolveStatus, Solver, SolverConfig, SolverError};
use crate::ilp::{feasible, IlpModel};

/// Depth-first LP-relaxation branch-and-bound. The round-down child is
/// explored first; branching picks the most fractional variable.
#[derive(Debug, Clone, Copy, Default)]
pub struct BranchAndBound;

/// Gomory cut rounds at the root before branching.
const CUT_ROUNDS: usize = 5;
const CUTS_PER_ROUND: usize = 8;
const MAX_CUTS: usize = 32;

struct Node {
    /// Bound changes relative to the root: `(var, lower, upper)`.
    changes: Vec<(usize, f64, f64)>,
    /// Best (largest) minimization-form LP bound among the ancestors.
    ancestor_bound: f64,
}

impl Solver for BranchAndBound {
    fn name(&self) -> &'static str {
        "branch-and-bound"
    }

    fn solve(&self, model: &IlpModel, cfg: &SolverConfig) -> Result<SolveResult, SolverError> {
        cfg.check()?;
        let start = Instant::now();
        let deadline = start.checked_add(cfg.time_limit);
        let uppers = finite_uppers(model)?;
        let n = model.num_vars();
        let root_lo: Vec<f64> = model.variables.iter().map(|v| v.lower as f64).collect();
        let root_up: Vec<f64> = uppers.iter().map(|&u| u as f64).collect();
        let mut stats = SolveStats::default();
        if root_lo.iter().zip(&root_up).any(|(l, u)| l > u) {
            stats.wall_time = start.elapsed();
            return Ok(SolveResult::infeasible(stats));
        }

        let mut data = LpData::new(model);
        let (base_rows, mut last) = (data.rows(), f64::NEG_INFINITY);
        for _ in 0..CUT_ROUNDS {
            if data.rows() >= base_rows + MAX_CUTS {
                break;
            }
            let (lp, cuts) = data.solve_and_cut(&root_lo, &root_up, deadline, CUTS_PER_ROUND)?;
            stats.lp_iterations += lp.iterations;
            if lp.status != LpStatus::Optimal
                || cuts.is_empty()
                || lp.objective - last <= 1e-6 * lp.objective.abs().max(1.0)
            {
                break;
            }
            last = lp.objective;
            data = data.with_cuts(&cuts);
        }
        let integral_objective = data.cost.iter().all(|c| c.fract() == 0.0);
        let rank: Option<Vec<usize>> = (cfg.seed != 0).then(|| {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
            let mut rank = vec![0; n];
            for (r, &v) in perm.iter().enumerate() {
                rank[v] = r;
            }
            rank
        });

        let mut incumbent: Option<(Vec<u64>, f64)> = None;
        let mut stack = vec![Node {
            changes: Vec::new(),
            ancestor_bound: f64::NEG_INFINITY,
        }];
        let mut hit_limit = false;
        let (mut root_lo, mut root_up) = (root_lo, root_up);
        let (mut lo, mut up) = (root_lo.clone(), root_up.clone());
        // root LP bound and reduced costs, for fixing against the incumbent
        let mut root_duals: Option<(f64, Vec<f64>, Vec<f64>)> = None;

        while let Some(node) = stack.pop() {
            if deadline.is_some_and(|d| Instant::now() >= d)
                || cfg.node_limit.is_some_and(|l| stats.nodes >= l)
            {
                hit_limit = true;
                break;
            }
            stats.nodes += 1;
            lo.copy_from_slice(&root_lo);
            up.copy_from_slice(&root_up);
            for &(v, l, u) in &node.changes {
                lo[v] = lo[v].max(l);
                up[v] = up[v].min(u);
            }
            if lo.iter().zip(&up).any(|(l, u)| l > u) {
                continue;
            }
            let lp = data.solve(&lo, &up, deadline)?;
            stats.lp_iterations += lp.iterations;
            match lp.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => continue,
                LpStatus::TimeLimit => {
                    hit_limit = true;
                    break;
                }
                LpStatus::Unbounded => unreachable!("finite bounds"),
            }
            let bound = lp.objective;
            if node.changes.is_empty() && root_duals.is_none() {
                root_duals = Some((bound, lp.x.clone(), lp.reduced.clone()));
                if incumbent.is_none() {
                    if let Some((x, value)) = dive(&data, model, &lo, &up, &lp.x, cfg, deadline, &mut stats)? {
                        if let Some((z, x0, d)) = &root_duals {
                            fix_by_reduced_cost(*z, x0, d, value, &mut root_lo, &mut root_up);
                        }
                        incumbent = Some((x, value));
                    }
                }
            }
            if let Some((_, inc)) = &incumbent {
                if prune(bound, *inc, integral_objective) {
                    continue;
                }
            }
            if let Some((x, value)) = round_solution(model, &data.cost, &lp.x) {
                if incumbent.as_ref().is_none_or(|(_, inc)| value < *inc) {
                    if let Some((z, x0, d)) = &root_duals {
                        fix_by_reduced_cost(*z, x0, d, value, &mut root_lo, &mut root_up);
                    }
                    incumbent = Some((x, value));
                }
            }

            let mut branch: Option<(usize, f64)> = None;
            for (j, &xj) in lp.x.iter().enumerate() {
                let dist = (xj - xj.round()).abs();
                if dist <= cfg.integrality_tol {
                    continue;
                }
                let better = match branch {
                    None => true,
                    Some((b, bd)) => {
                        dist > bd
                            || (dist == bd && rank.as_ref().is_some_and(|r| r[j] < r[b]))
                    }
                };
                if better {
                    branch = Some((j, dist));
                }
            }

            match branch {
                None => {
                    let x: Vec<u64> = lp.x.iter().map(|v| v.round().max(0.0) as u64).collect();
                    if !feasible(model, &x).expect("length matches") {
                        continue;
                    }
                    let value: f64 = x.iter().zip(&data.cost).map(|(&v, c)| v as f64 * c).sum();
                    debug_assert!(
                        value >= node.ancestor_bound.max(bound) - 1e-6 * value.abs().max(1.0),
                        "integral value {value} beats ancestor LP bound {}",
                        node.ancestor_bound.max(bound)
                    );
                    if incumbent.as_ref().is_none_or(|(_, inc)| value < *inc) {
                        incumbent = Some((x, value));
                        if let Some((z, x0, d)) = &root_duals {
                            fix_by_reduced_cost(*z, x0, d, value, &mut root_lo, &mut root_up);
                        }
                    }
                }
                Some((j, _)) => {
                    let xj = lp.x[j];
                    let ancestor_bound = node.ancestor_bound.max(bound);
                    let mut changes = node.changes;
                    if let Some((_, inc)) = &incumbent {
                        let (mut flo, mut fup) = (lo.clone(), up.clone());
                        fix_by_reduced_cost(bound, &lp.x, &lp.reduced, *inc, &mut flo, &mut fup);
                        for v in 0..n {
                            if flo[v] != lo[v] || fup[v] != up[v] {
                                changes.push((v, flo[v], fup[v]));
                            }
                        }
                    }
                    let mut up_child = changes.clone();
                    up_child.push((j, xj.ceil(), up[j]));
                    let mut down_child = changes;
                    down_child.push((j, lo[j], xj.floor()));
                    stack.push(Node {
                        changes: up_child,
                        ancestor_bound,
                    });
                    stack.push(Node {
                        changes: down_child,
                        ancestor_bound,
                    });
                }
            }
        }

        stats.wall_time = start.elapsed();
        let status = match (&incumbent, hit_limit) {
            (_, true) => SolveStatus::TimeLimit,
            (Some(_), false) => SolveStatus::Optimal,
            (None, false) => SolveStatus::Infeasible,
        };
        Ok(match incumbent {
            Some((x, _)) => {
                let objective = model.objective_value(&x);
                SolveResult {
                    status,
                    solution: Some(x),
                    objective: Some(objective),
                    stats,
                }
            }
            None => SolveResult {
                status,
                solution: None,
                objective: None,
                stats,
            },
        })
    }
}

/// Rounding dive from the root relaxation `x`: repeatedly raises the
/// fractional variable closest to its ceiling and re-solves, looking for a
/// first incumbent. Every step raises some lower bound, so the dive ends
/// after at most `Σ(upper − lower)` re-solves.
#[allow(clippy::too_many_arguments)]
fn dive(
    data: &LpData,
    model: &IlpModel,
    lo: &[f64],
    up: &[f64],
    x: &[f64],
    cfg: &SolverConfig,
    deadline: Option<Instant>,
    stats: &mut SolveStats,
) -> Result<Option<(Vec<u64>, f64)>, SolverError> {
    let (mut lo, mut x) = (lo.to_vec(), x.to_vec());
    loop {
        if let Some(found) = round_solution(model, &data.cost, &x) {
            return Ok(Some(found));
        }
        let pick = x
            .iter()
            .enumerate()
            .filter(|(_, v)| (*v - v.round()).abs() > cfg.integrality_tol)
            .max_by(|(i, a), (j, b)| a.fract().total_cmp(&b.fract()).then(j.cmp(i)))
            .map(|(i, _)| i);
        let Some(j) = pick else {
            return Ok(None);
        };
        lo[j] = x[j].ceil().min(up[j]);
        let lp = data.solve(&lo, up, deadline)?;
        stats.lp_iterations += lp.iterations;
        if lp.status != LpStatus::Optimal {
            return Ok(None);
        }
        x = lp.x;
    }
}

/// The best feasible vector among the floor, nearest and ceiling roundings
/// of `x`, with its minimization-form value.
fn round_solution(model: &IlpModel, cost: &[f64], x: &[f64]) -> Option<(Vec<u64>, f64)> {
    let mut best: Option<(Vec<u64>, f64)> = None;
    for round in [f64::floor, f64::round, f64::ceil] {
        let xi: Vec<u64> = x.iter().map(|&v| round(v + 0.0).max(0.0) as u64).collect();
        if best.as_ref().is_some_and(|(b, _)| *b == xi) || !feasible(model, &xi).expect("length matches") {
            continue;
        }
        let value: f64 = xi.iter().zip(cost).map(|(&v, c)| v as f64 * c).sum();
        if best.as_ref().is_none_or(|(_, b)| value < *b) {
            best = Some((xi, value));
        }
    }
    best
}

/// Tightens root bounds so that no remaining vector can have an LP bound,
/// implied by the root reduced costs `d` at the root solution `x0`, at or
/// above the incumbent value `inc`.
fn fix_by_reduced_cost(z: f64, x0: &[f64], d: &[f64], inc: f64, lo: &mut [f64], up: &mut [f64]) {
    let gap = inc - z + 1e-9 * inc.abs().max(1.0);
    if gap < 0.0 {
        return;
    }
    for j in 0..d.len() {
        let dj = d[j];
        if dj.abs() <= 1e-9 {
            continue;
        }
        let steps = (gap / dj.abs()).floor();
        if dj > 0.0 && x0[j] <= lo[j] {
            up[j] = up[j].min(x0[j] + steps);
        } else if dj < 0.0 && x0[j] >= up[j] {
            lo[j] = lo[j].max(x0[j] - steps);
        }
    }
}

/// Whether a node with minimization-form LP bound `bound` cannot improve on
/// the incumbent value `inc`.
fn prune(bound: f64, inc: f64, integral_objective: bool) -> bool {
    let tol = 1e-9 * inc.abs().max(1.0);
    if integral_objective {
        // every integral solution has an integral objective
        (bound - 1e-6).ceil() >= inc - tol
    } else {
        bound >= inc - tol
    }
}
