use std::collections::{BTreeSet, VecDeque};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ms, package_is_feasible, EvalConfig, EvalError, EvalReport, EvalStatus, Method, Package, Timings};
use crate::ilp::{derive_bounds, tighten_bounds, translate_over, IlpModel, LinearConstraint, Variable};
use crate::paql::CheckedQuery;
use crate::partition::{quad_tree, Partitioning};
use crate::relation::Relation;
use crate::solver::{SolveStatus, SolverConfig, SolverError};

/// Nesting limit for solving sketch or refine subproblems by sketch-refine.
const MAX_DEPTH: usize = 3;

/// The sketch problem over group representatives. Variable `j` is the
/// multiplicity of group `j`'s representative; its coefficients are the
/// means of the member coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SketchModel {
    pub model: IlpModel,
    /// `|G_j|·(1+K)` under `REPEAT K`; `None` when repetition is unlimited.
    pub capacities: Vec<Option<u64>>,
}

/// The query restricted to the partitioned, base-filtered tuples.
struct Prepared {
    /// Variables follow `domain` order.
    model: IlpModel,
    /// Variable indices of each non-empty group.
    groups: Vec<Vec<usize>>,
    /// Partitioning group index of each entry of `groups`.
    group_ids: Vec<usize>,
    flags: BTreeSet<String>,
}

fn prepare(q: &CheckedQuery, rel: &Relation, p: &Partitioning) -> crate::Result<Prepared> {
    p.check(rel)?;
    let mut flags = BTreeSet::new();
    let covers = q
        .numeric_attrs
        .iter()
        .all(|&a| p.attrs.iter().any(|name| *name == rel.schema().attributes()[a].name));
    if !covers {
        flags.insert("partition_attrs_do_not_cover_query".to_string());
    }
    let covered = p.covered_ids();
    let domain: Vec<usize> = match &q.base {
        Some(base) => covered.iter().copied().filter(|&id| base.matches(rel, id)).collect(),
        None => covered.clone(),
    };
    if domain.len() < covered.len() {
        flags.insert("partitioning_restricted".to_string());
        let r = p.restrict(rel, &domain)?;
        if r.groups.iter().any(|g| !g.degenerate && g.radius > r.omega) {
            flags.insert("radius_violation".to_string());
        }
    }
    let model = derive_bounds(&translate_over(q, rel, &domain))?;
    let mut var_of = vec![usize::MAX; rel.len()];
    for (v, &id) in domain.iter().enumerate() {
        var_of[id] = v;
    }
    let mut groups = Vec::new();
    let mut group_ids = Vec::new();
    for (g, group) in p.groups.iter().enumerate() {
        let vars: Vec<usize> = group.members.iter().map(|&id| var_of[id]).filter(|&v| v != usize::MAX).collect();
        if !vars.is_empty() {
            if group.degenerate {
                flags.insert("degenerate_groups".to_string());
            }
            groups.push(vars);
            group_ids.push(g);
        }
    }
    Ok(Prepared {
        model,
        groups,
        group_ids,
        flags,
    })
}

/// Mean coefficient of each group in each constraint, and mean objective.
struct Representatives {
    coef: Vec<Vec<f64>>,
    obj: Vec<f64>,
}

fn representatives(model: &IlpModel, groups: &[Vec<usize>]) -> Representatives {
    let mean = |row: &[f64], g: &[usize]| g.iter().map(|&v| row[v]).sum::<f64>() / g.len() as f64;
    Representatives {
        coef: groups
            .iter()
            .map(|g| model.constraints.iter().map(|c| mean(&c.coefficients, g)).collect())
            .collect(),
        obj: groups.iter().map(|g| mean(&model.objective, g)).collect(),
    }
}

/// Sketch over `groups` of a model whose variables all have finite upper
/// bounds. A representative may be taken at most as often as its members
/// could be taken together; bounds are then tightened by the sketch's own
/// packing constraints.
fn sketch_of(model: &IlpModel, groups: &[Vec<usize>], reps: &Representatives) -> IlpModel {
    let variables = groups
        .iter()
        .enumerate()
        .map(|(j, g)| Variable {
            tuple_id: j,
            lower: 0,
            upper: Some(
                g.iter()
                    .map(|&v| model.variables[v].upper.unwrap_or(u64::MAX))
                    .fold(0u64, u64::saturating_add),
            ),
        })
        .collect();
    let constraints = model
        .constraints
        .iter()
        .enumerate()
        .map(|(c, row)| LinearConstraint {
            coefficients: reps.coef.iter().map(|r| r[c]).collect(),
            op: row.op,
            rhs: row.rhs,
            source: row.source,
        })
        .collect();
    tighten_bounds(&IlpModel {
        variables,
        constraints,
        sense: model.sense,
        objective: reps.obj.clone(),
    })
}

/// Refine problem for group `g`: its members' variables, with every
/// right-hand side shifted by `other`, the contribution of the rest of the
/// package.
fn refine_of(model: &IlpModel, group: &[usize], other: &[f64]) -> IlpModel {
    let mut r = model.select_vars(group);
    for (c, o) in r.constraints.iter_mut().zip(other) {
        c.rhs -= o;
    }
    tighten_bounds(&r)
}

/// The sketch problem for `q` over partitioning `p`. Variable `j`
/// (`tuple_id == j`) stands for the `j`-th partitioning group that has a
/// tuple passing the base predicate.
pub fn build_sketch_model(q: &CheckedQuery, rel: &Relation, p: &Partitioning) -> crate::Result<SketchModel> {
    let prep = prepare(q, rel, p)?;
    let reps = representatives(&prep.model, &prep.groups);
    let capacities = prep
        .group_ids
        .iter()
        .map(|&g| q.repeat.map(|k| (p.groups[g].size() as u64).saturating_mul(k.saturating_add(1))))
        .collect();
    Ok(SketchModel {
        model: sketch_of(&prep.model, &prep.groups, &reps),
        capacities,
    })
}

/// The refine problem for partitioning group `group` given the rest of the
/// package `partial` (original tuples outside the group). Variables are the
/// group's members passing the base predicate.
pub fn build_refine_model(
    q: &CheckedQuery,
    rel: &Relation,
    p: &Partitioning,
    group: usize,
    partial: &Package,
) -> crate::Result<IlpModel> {
    let prep = prepare(q, rel, p)?;
    let vars = prep
        .group_ids
        .iter()
        .position(|&g| g == group)
        .map(|j| prep.groups[j].clone())
        .unwrap_or_default();
    let ids: Vec<usize> = partial.entries.keys().copied().collect();
    let x: Vec<u64> = partial.entries.values().copied().collect();
    let other: Vec<f64> = translate_over(q, rel, &ids).constraints.iter().map(|c| c.lhs(&x)).collect();
    Ok(refine_of(&prep.model, &vars, &other))
}

enum Outcome {
    Solved(Vec<u64>),
    Infeasible,
    TimeLimit,
}

/// A sketch solved with one group's original tuples in place of its
/// representative.
#[derive(Debug, Clone, PartialEq)]
pub enum HybridOutcome {
    Found {
        /// Partitioning group whose originals were used.
        group: usize,
        /// Representative multiplicity per partitioning group; 0 for
        /// `group` itself.
        sketch: Vec<u64>,
        originals: Vec<(usize, u64)>,
    },
    Infeasible,
    TimeLimit,
}

struct Engine<'a> {
    cfg: &'a EvalConfig,
    deadline: Instant,
    threshold: usize,
    rng: ChaCha8Rng,
    subproblems: u64,
    backtracks: u64,
    solve_time: Duration,
    sketch_time: Duration,
    refine_time: Duration,
    flags: BTreeSet<String>,
}

struct Frame {
    queue: VecDeque<usize>,
    failed: Vec<usize>,
    /// Group refined when this frame was entered; `None` at the root.
    group: Option<usize>,
}

fn prioritize(queue: &mut VecDeque<usize>, failed: &[usize]) {
    for &g in failed {
        if let Some(i) = queue.iter().position(|&x| x == g) {
            queue.remove(i);
            queue.push_front(g);
        }
    }
}

impl<'a> Engine<'a> {
    fn new(cfg: &'a EvalConfig, start: Instant, threshold: usize) -> Self {
        Engine {
            cfg,
            deadline: start + cfg.time_limit,
            threshold: threshold.max(1),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            subproblems: 0,
            backtracks: 0,
            solve_time: Duration::ZERO,
            sketch_time: Duration::ZERO,
            refine_time: Duration::ZERO,
            flags: BTreeSet::new(),
        }
    }

    fn direct(&mut self, model: &IlpModel) -> crate::Result<Outcome> {
        let remaining = self.deadline.saturating_duration_since(Instant::now());
        if remaining.is_zero() {
            return Ok(Outcome::TimeLimit);
        }
        self.subproblems += 1;
        let t = Instant::now();
        let solver_cfg = SolverConfig {
            node_limit: self.cfg.subproblem_node_limit,
            ..self.cfg.solver_config(remaining)
        };
        let result = self.cfg.solver.solve(model, &solver_cfg);
        self.solve_time += t.elapsed();
        let result = match result {
            Err(SolverError::NumericalSingularity | SolverError::IterationLimit(_)) => {
                self.flags.insert("numerical_failure".to_string());
                return Ok(Outcome::Infeasible);
            }
            r => r?,
        };
        Ok(match result.status {
            SolveStatus::Optimal => Outcome::Solved(result.solution.expect("optimal result has a solution")),
            SolveStatus::Infeasible => Outcome::Infeasible,
            SolveStatus::TimeLimit if Instant::now() >= self.deadline => Outcome::TimeLimit,
            SolveStatus::TimeLimit => {
                self.flags.insert("subproblem_node_limit".to_string());
                match result.solution {
                    Some(x) => Outcome::Solved(x),
                    None => Outcome::Infeasible,
                }
            }
            SolveStatus::Unbounded => return Err(EvalError::Unbounded.into()),
        })
    }

    /// Solves directly, or by sketch-refine over a quad-tree of the model's
    /// columns when the model is larger than the threshold.
    fn solve_model(&mut self, model: &IlpModel, depth: usize) -> crate::Result<Outcome> {
        if model.num_vars() > self.threshold && depth < MAX_DEPTH {
            let cols: Vec<&[f64]> = std::iter::once(model.objective.as_slice())
                .chain(model.constraints.iter().map(|c| c.coefficients.as_slice()))
                .collect();
            let groups: Vec<Vec<usize>> = quad_tree(&cols, (0..model.num_vars()).collect(), self.threshold, f64::INFINITY)
                .into_iter()
                .map(|g| g.members)
                .collect();
            if groups.len() > 1 {
                self.flags.insert("recursive".to_string());
                return self.sketch_refine(model, &groups, depth + 1);
            }
        }
        self.direct(model)
    }

    fn sketch_refine(&mut self, model: &IlpModel, groups: &[Vec<usize>], depth: usize) -> crate::Result<Outcome> {
        let t = Instant::now();
        let reps = representatives(model, groups);
        let sketch = sketch_of(model, groups, &reps);
        let (mult, pre) = match self.solve_model(&sketch, depth)? {
            Outcome::Solved(x) => (x, None),
            Outcome::TimeLimit => return Ok(Outcome::TimeLimit),
            Outcome::Infeasible if self.cfg.hybrid_sketch => match self.hybrid(model, groups, &sketch, depth)? {
                HybridOutcome::Found { group, sketch, originals } => {
                    let xg = originals.into_iter().map(|(_, m)| m).collect();
                    (sketch, Some((group, xg)))
                }
                HybridOutcome::Infeasible => return Ok(Outcome::Infeasible),
                HybridOutcome::TimeLimit => return Ok(Outcome::TimeLimit),
            },
            Outcome::Infeasible => return Ok(Outcome::Infeasible),
        };
        if depth == 0 {
            self.sketch_time += t.elapsed();
        }
        let t = Instant::now();
        let out = self.refine(model, groups, &reps, &mult, pre, depth);
        if depth == 0 {
            self.refine_time += t.elapsed();
        }
        out
    }

    /// Tries each group in seeded random order with its original tuples and
    /// representatives for the rest. `originals` pairs are
    /// `(member position, multiplicity)` over all members.
    fn hybrid(&mut self, model: &IlpModel, groups: &[Vec<usize>], sketch: &IlpModel, depth: usize) -> crate::Result<HybridOutcome> {
        self.flags.insert("hybrid_sketch".to_string());
        let m = groups.len();
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(&mut self.rng);
        for g in order {
            let orig = model.select_vars(&groups[g]);
            let others: Vec<usize> = (0..m).filter(|&j| j != g).collect();
            let rest = sketch.select_vars(&others);
            let merged = IlpModel {
                variables: orig.variables.iter().chain(&rest.variables).copied().collect(),
                constraints: orig
                    .constraints
                    .iter()
                    .zip(&rest.constraints)
                    .map(|(a, b)| LinearConstraint {
                        coefficients: a.coefficients.iter().chain(&b.coefficients).copied().collect(),
                        ..a.clone()
                    })
                    .collect(),
                sense: model.sense,
                objective: orig.objective.iter().chain(&rest.objective).copied().collect(),
            };
            match self.solve_model(&merged, depth)? {
                Outcome::Solved(x) => {
                    let n = groups[g].len();
                    let mut mult = vec![0; m];
                    for (&j, &v) in others.iter().zip(&x[n..]) {
                        mult[j] = v;
                    }
                    return Ok(HybridOutcome::Found {
                        group: g,
                        sketch: mult,
                        originals: x[..n].iter().copied().enumerate().collect(),
                    });
                }
                Outcome::TimeLimit => return Ok(HybridOutcome::TimeLimit),
                Outcome::Infeasible => {}
            }
        }
        Ok(HybridOutcome::Infeasible)
    }

    /// Greedy backtracking refinement. Each frame holds the groups still to
    /// try at that level; a refine failure below the root abandons the frame
    /// and hands its failed groups to the parent, which tries them first.
    fn refine(
        &mut self,
        model: &IlpModel,
        groups: &[Vec<usize>],
        reps: &Representatives,
        mult: &[u64],
        pre: Option<(usize, Vec<u64>)>,
        depth: usize,
    ) -> crate::Result<Outcome> {
        let m = groups.len();
        let k = model.constraints.len();
        let contribution = |g: usize, xg: &[u64]| -> Vec<f64> {
            model
                .constraints
                .iter()
                .map(|c| {
                    groups[g]
                        .iter()
                        .zip(xg)
                        .filter(|(_, &x)| x > 0)
                        .map(|(&v, &x)| c.coefficients[v] * x as f64)
                        .sum()
                })
                .collect()
        };
        let mut assign: Vec<Option<Vec<u64>>> = vec![None; m];
        let mut refined_lhs = vec![0.0; k];
        let mut sketch_lhs = vec![0.0; k];
        let pre_group = pre.as_ref().map(|(g, _)| *g);
        let active: Vec<usize> = (0..m).filter(|&j| mult[j] > 0 && Some(j) != pre_group).collect();
        for &j in &active {
            for (s, a) in sketch_lhs.iter_mut().zip(&reps.coef[j]) {
                *s += a * mult[j] as f64;
            }
        }
        if let Some((g, xg)) = pre {
            for (r, c) in refined_lhs.iter_mut().zip(contribution(g, &xg)) {
                *r += c;
            }
            assign[g] = Some(xg);
        }
        let mut order = active.clone();
        order.shuffle(&mut self.rng);
        let mut rank = vec![usize::MAX; m];
        for (r, &j) in order.iter().enumerate() {
            rank[j] = r;
        }
        let mut unrefined: BTreeSet<usize> = active.iter().copied().collect();
        let budget = self.cfg.backtrack_limit.unwrap_or(10 * m as u64);
        let mut solves = 0u64;
        let mut frames = vec![Frame {
            queue: order.into(),
            failed: Vec::new(),
            group: None,
        }];

        loop {
            if unrefined.is_empty() {
                let mut x = vec![0u64; model.num_vars()];
                for (g, xg) in assign.iter().enumerate() {
                    if let Some(xg) = xg {
                        for (&v, &val) in groups[g].iter().zip(xg) {
                            x[v] = val;
                        }
                    }
                }
                return Ok(Outcome::Solved(x));
            }
            let next = frames.last_mut().expect("root frame").queue.pop_front();
            let failed_group = match next {
                None => None,
                Some(g) => {
                    if solves >= budget {
                        self.flags.insert("backtrack_limit".to_string());
                        return Ok(Outcome::Infeasible);
                    }
                    solves += 1;
                    let other: Vec<f64> = (0..k)
                        .map(|c| refined_lhs[c] + sketch_lhs[c] - reps.coef[g][c] * mult[g] as f64)
                        .collect();
                    let r = refine_of(model, &groups[g], &other);
                    match self.solve_model(&r, depth)? {
                        Outcome::TimeLimit => return Ok(Outcome::TimeLimit),
                        Outcome::Solved(xg) => {
                            for (acc, c) in refined_lhs.iter_mut().zip(contribution(g, &xg)) {
                                *acc += c;
                            }
                            for (s, a) in sketch_lhs.iter_mut().zip(&reps.coef[g]) {
                                *s -= a * mult[g] as f64;
                            }
                            unrefined.remove(&g);
                            assign[g] = Some(xg);
                            let top = frames.last().expect("frame");
                            let mut queue: VecDeque<usize> = VecDeque::new();
                            for &f in top.failed.iter().rev() {
                                if unrefined.contains(&f) && !queue.contains(&f) {
                                    queue.push_back(f);
                                }
                            }
                            let mut rest: Vec<usize> = unrefined.iter().copied().filter(|j| !queue.contains(j)).collect();
                            rest.sort_by_key(|&j| rank[j]);
                            queue.extend(rest);
                            frames.push(Frame {
                                queue,
                                failed: Vec::new(),
                                group: Some(g),
                            });
                            continue;
                        }
                        Outcome::Infeasible => Some(g),
                    }
                }
            };
            if frames.len() == 1 {
                match failed_group {
                    // root: move on to the next group
                    Some(g) => {
                        frames[0].failed.push(g);
                        continue;
                    }
                    None => return Ok(Outcome::Infeasible),
                }
            }
            let frame = frames.pop().expect("non-root frame");
            let mut failed = frame.failed;
            failed.extend(failed_group);
            if let Some(h) = frame.group {
                let xh = assign[h].take().expect("refined group");
                for (acc, c) in refined_lhs.iter_mut().zip(contribution(h, &xh)) {
                    *acc -= c;
                }
                for (s, a) in sketch_lhs.iter_mut().zip(&reps.coef[h]) {
                    *s += a * mult[h] as f64;
                }
                unrefined.insert(h);
            }
            self.backtracks += 1;
            let parent = frames.last_mut().expect("parent frame");
            prioritize(&mut parent.queue, &failed);
            for g in failed {
                parent.failed.retain(|&f| f != g);
                parent.failed.push(g);
            }
        }
    }
}

fn threshold_for(cfg: &EvalConfig, p: &Partitioning) -> usize {
    cfg.recursion_threshold.unwrap_or(p.tau)
}

/// Evaluates `q` over the tuples covered by `p`: solves the sketch over
/// group representatives, then refines each group with a representative in
/// the sketch, backtracking greedily on refine failures.
pub fn eval_sketchrefine(q: &CheckedQuery, rel: &Relation, p: &Partitioning, cfg: &EvalConfig) -> crate::Result<EvalReport> {
    let start = Instant::now();
    let prep = prepare(q, rel, p)?;
    let translated = start.elapsed();
    let mut engine = Engine::new(cfg, start, threshold_for(cfg, p));
    let outcome = engine.sketch_refine(&prep.model, &prep.groups, 0)?;
    let elapsed = start.elapsed();
    let mut report = EvalReport::new(Method::SketchRefine, EvalStatus::Infeasible);
    report.flags = prep.flags;
    report.flags.append(&mut engine.flags);
    match outcome {
        Outcome::Solved(x) => {
            let pkg = Package::from_pairs(q, rel, prep.model.package_of(&x));
            if package_is_feasible(q, rel, &pkg)? {
                report.status = EvalStatus::Feasible;
                report.package = Some(pkg);
            } else {
                report.flags.insert("final_check_failed".to_string());
            }
        }
        Outcome::Infeasible => {}
        Outcome::TimeLimit => report.status = EvalStatus::TimeLimit,
    }
    report.backtracks = engine.backtracks;
    report.subproblems = engine.subproblems;
    report.timings = Timings {
        translate: ms(translated),
        solve: ms(engine.solve_time),
        sketch: ms(engine.sketch_time),
        refine: ms(engine.refine_time),
        total: ms(elapsed),
    };
    Ok(report)
}

/// Solves the sketch with, in turn, each group's original tuples in place
/// of its representative, stopping at the first feasible combination.
/// Group indices in the result refer to `p.groups`; original pairs are
/// `(tuple id, multiplicity)`.
pub fn hybrid_sketch(q: &CheckedQuery, rel: &Relation, p: &Partitioning, cfg: &EvalConfig) -> crate::Result<HybridOutcome> {
    let start = Instant::now();
    let prep = prepare(q, rel, p)?;
    let mut engine = Engine::new(cfg, start, threshold_for(cfg, p));
    let reps = representatives(&prep.model, &prep.groups);
    let sketch = sketch_of(&prep.model, &prep.groups, &reps);
    Ok(match engine.hybrid(&prep.model, &prep.groups, &sketch, 0)? {
        HybridOutcome::Found { group, sketch, originals } => {
            let mut full = vec![0; p.num_groups()];
            for (j, &v) in sketch.iter().enumerate() {
                full[prep.group_ids[j]] = v;
            }
            HybridOutcome::Found {
                group: prep.group_ids[group],
                sketch: full,
                originals: originals
                    .into_iter()
                    .filter(|&(_, m)| m > 0)
                    .map(|(i, m)| (prep.model.variables[prep.groups[group][i]].tuple_id, m))
                    .collect(),
            }
        }
        other => other,
    })
}
