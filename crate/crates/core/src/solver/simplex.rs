//! Dense bounded-variable primal simplex (revised form, explicit basis
//! inverse). Rows are the model constraints; variable bounds are handled
//! implicitly, so a row is never spent on `x ≤ u`.

use std::time::Instant;

use super::SolverError;
use crate::ilp::IlpModel;
use crate::paql::{GlobalOp, Sense};

const PIVOT_TOL: f64 = 1e-9;
const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const REFACTOR_EVERY: u32 = 64;
const DEGENERATE_BEFORE_BLAND: u32 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    TimeLimit,
}

/// Result of [`lp_relax`]. `objective` is in the model's own sense and is
/// a bound on the integer optimum (upper for maximize, lower for minimize).
#[derive(Debug, Clone, PartialEq)]
pub struct LpRelaxation {
    pub status: LpStatus,
    pub solution: Vec<f64>,
    pub objective: f64,
    pub iterations: u64,
}

/// Solves the continuous relaxation of `model` (bounds must be finite).
pub fn lp_relax(model: &IlpModel) -> Result<LpRelaxation, SolverError> {
    let uppers = super::finite_uppers(model)?;
    let data = LpData::new(model);
    let lo: Vec<f64> = model.variables.iter().map(|v| v.lower as f64).collect();
    let up: Vec<f64> = uppers.iter().map(|&u| u as f64).collect();
    let out = data.solve(&lo, &up, None)?;
    let objective = match model.sense {
        Sense::Minimize => out.objective,
        Sense::Maximize => -out.objective,
    };
    Ok(LpRelaxation {
        status: out.status,
        solution: out.x,
        objective,
        iterations: out.iterations,
    })
}

/// Constraint data shared by every relaxation solved for one model, in
/// minimization form.
pub(crate) struct LpData {
    m: usize,
    n: usize,
    /// Column-major `n × m` constraint matrix.
    cols: Vec<f64>,
    rhs: Vec<f64>,
    slack_lo: Vec<f64>,
    slack_up: Vec<f64>,
    pub(crate) cost: Vec<f64>,
}

/// A valid inequality `coef·x ≥ rhs` over the structural variables.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Cut {
    pub coef: Vec<f64>,
    pub rhs: f64,
}

pub(crate) struct LpOutcome {
    pub status: LpStatus,
    pub x: Vec<f64>,
    /// Minimization-form objective.
    pub objective: f64,
    pub iterations: u64,
    /// Reduced costs of the structural variables at an optimal basis
    /// (zero for basic ones); empty otherwise.
    pub reduced: Vec<f64>,
}

impl LpData {
    pub fn new(model: &IlpModel) -> Self {
        let m = model.constraints.len();
        let n = model.num_vars();
        let mut cols = vec![0.0; n * m];
        for (i, c) in model.constraints.iter().enumerate() {
            for (j, &a) in c.coefficients.iter().enumerate() {
                cols[j * m + i] = a;
            }
        }
        let (slack_lo, slack_up) = model
            .constraints
            .iter()
            .map(|c| match c.op {
                GlobalOp::Le => (0.0, f64::INFINITY),
                GlobalOp::Ge => (f64::NEG_INFINITY, 0.0),
                GlobalOp::Eq => (0.0, 0.0),
            })
            .unzip();
        let sign = match model.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        LpData {
            m,
            n,
            cols,
            rhs: model.constraints.iter().map(|c| c.rhs).collect(),
            slack_lo,
            slack_up,
            cost: model.objective.iter().map(|&c| sign * c).collect(),
        }
    }

    /// The same relaxation with the rows `coef·x ≥ rhs` appended.
    pub fn with_cuts(&self, cuts: &[Cut]) -> LpData {
        let m = self.m + cuts.len();
        let mut cols = Vec::with_capacity(self.n * m);
        for j in 0..self.n {
            cols.extend_from_slice(self.column(j));
            cols.extend(cuts.iter().map(|c| c.coef[j]));
        }
        let mut d = LpData {
            m,
            n: self.n,
            cols,
            rhs: self.rhs.clone(),
            slack_lo: self.slack_lo.clone(),
            slack_up: self.slack_up.clone(),
            cost: self.cost.clone(),
        };
        for c in cuts {
            d.rhs.push(c.rhs);
            d.slack_lo.push(f64::NEG_INFINITY);
            d.slack_up.push(0.0);
        }
        d
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    /// Solves over all columns and derives up to `max_cuts` Gomory
    /// mixed-integer cuts from rows whose basic variable is structural and
    /// fractional. Every structural variable is taken to be integer.
    pub fn solve_and_cut(
        &self,
        lo: &[f64],
        up: &[f64],
        deadline: Option<Instant>,
        max_cuts: usize,
    ) -> Result<(LpOutcome, Vec<Cut>), SolverError> {
        let mut s = Simplex::new(self, lo, up);
        let out = s.run(deadline)?;
        let cuts = if out.status == LpStatus::Optimal {
            s.gomory_cuts(max_cuts)
        } else {
            Vec::new()
        };
        Ok((out, cuts))
    }

    /// Solves over the columns with `lo < up`; fixed columns are folded
    /// into the right-hand side first.
    pub fn solve(&self, lo: &[f64], up: &[f64], deadline: Option<Instant>) -> Result<LpOutcome, SolverError> {
        let active: Vec<usize> = (0..self.n).filter(|&j| lo[j] < up[j]).collect();
        if active.len() == self.n {
            return Simplex::new(self, lo, up).run(deadline);
        }
        let m = self.m;
        let mut rhs = self.rhs.clone();
        for j in 0..self.n {
            if lo[j] >= up[j] && lo[j] != 0.0 {
                for (r, a) in rhs.iter_mut().zip(self.column(j)) {
                    *r -= a * lo[j];
                }
            }
        }
        let mut cols = Vec::with_capacity(active.len() * m);
        for &j in &active {
            cols.extend_from_slice(self.column(j));
        }
        let sub = LpData {
            m,
            n: active.len(),
            cols,
            rhs,
            slack_lo: self.slack_lo.clone(),
            slack_up: self.slack_up.clone(),
            cost: active.iter().map(|&j| self.cost[j]).collect(),
        };
        let sub_lo: Vec<f64> = active.iter().map(|&j| lo[j]).collect();
        let sub_up: Vec<f64> = active.iter().map(|&j| up[j]).collect();
        let out = Simplex::new(&sub, &sub_lo, &sub_up).run(deadline)?;
        let mut x = lo.to_vec();
        let mut reduced = vec![0.0; if out.reduced.is_empty() { 0 } else { self.n }];
        for (k, &j) in active.iter().enumerate() {
            x[j] = out.x[k];
            if let Some(r) = reduced.get_mut(j) {
                *r = out.reduced[k];
            }
        }
        let objective = x.iter().zip(&self.cost).map(|(x, c)| x * c).sum();
        Ok(LpOutcome {
            status: out.status,
            x,
            objective,
            iterations: out.iterations,
            reduced,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Basic,
    Lower,
    Upper,
}

enum Step {
    Flip,
    Pivot { row: usize, to_upper: bool },
}

/// Variables are numbered structural `0..n`, slacks `n..n+m`, artificials
/// `n+m..n+2m`.
struct Simplex<'a> {
    d: &'a LpData,
    lo: Vec<f64>,
    up: Vec<f64>,
    x: Vec<f64>,
    status: Vec<Status>,
    cost: Vec<f64>,
    /// Sign of each artificial column.
    sigma: Vec<f64>,
    basis: Vec<usize>,
    /// Row-major `m × m`.
    binv: Vec<f64>,
    reduced: Vec<f64>,
    iterations: u64,
    since_refactor: u32,
    degenerate_run: u32,
    bland: bool,
}

impl<'a> Simplex<'a> {
    fn new(d: &'a LpData, lo: &[f64], up: &[f64]) -> Self {
        let (m, n) = (d.m, d.n);
        let total = n + 2 * m;
        let mut s = Simplex {
            d,
            lo: Vec::with_capacity(total),
            up: Vec::with_capacity(total),
            x: vec![0.0; total],
            status: vec![Status::Lower; total],
            cost: vec![0.0; total],
            sigma: vec![1.0; m],
            basis: vec![0; m],
            binv: vec![0.0; m * m],
            reduced: vec![0.0; total],
            iterations: 0,
            since_refactor: 0,
            degenerate_run: 0,
            bland: false,
        };
        s.lo.extend_from_slice(lo);
        s.up.extend_from_slice(up);
        s.lo.extend_from_slice(&d.slack_lo);
        s.up.extend_from_slice(&d.slack_up);
        s.lo.extend(std::iter::repeat_n(0.0, m));
        s.up.extend(std::iter::repeat_n(f64::INFINITY, m));

        let mut residual = d.rhs.clone();
        for j in 0..n {
            s.x[j] = lo[j];
            if lo[j] != 0.0 {
                for (r, a) in residual.iter_mut().zip(d.column(j)) {
                    *r -= a * lo[j];
                }
            }
        }
        for (i, &r) in residual.iter().enumerate() {
            let slack = n + i;
            let art = n + m + i;
            if r >= s.lo[slack] && r <= s.up[slack] {
                s.basis[i] = slack;
                s.status[slack] = Status::Basic;
                s.x[slack] = r;
                s.binv[i * m + i] = 1.0;
            } else {
                let v = r.clamp(s.lo[slack], s.up[slack]);
                s.x[slack] = v;
                s.status[slack] = if v == s.lo[slack] { Status::Lower } else { Status::Upper };
                s.sigma[i] = if r > v { 1.0 } else { -1.0 };
                s.basis[i] = art;
                s.status[art] = Status::Basic;
                s.x[art] = (r - v).abs();
                s.binv[i * m + i] = s.sigma[i];
            }
        }
        s
    }

    fn m(&self) -> usize {
        self.d.m
    }

    /// `B⁻¹ A_j`.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let (m, n) = (self.d.m, self.d.n);
        let mut out = vec![0.0; m];
        if j < n {
            let a = self.d.column(j);
            for (r, o) in out.iter_mut().enumerate() {
                let row = &self.binv[r * m..(r + 1) * m];
                *o = row.iter().zip(a).map(|(b, a)| b * a).sum();
            }
        } else {
            let (i, s) = if j < n + m { (j - n, 1.0) } else { (j - n - m, self.sigma[j - n - m]) };
            for (r, o) in out.iter_mut().enumerate() {
                *o = s * self.binv[r * m + i];
            }
        }
        out
    }

    fn price(&mut self) {
        let (m, n) = (self.d.m, self.d.n);
        let mut y = vec![0.0; m];
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = self.cost[b];
            if cb != 0.0 {
                for (yc, bi) in y.iter_mut().zip(&self.binv[r * m..(r + 1) * m]) {
                    *yc += cb * bi;
                }
            }
        }
        for j in 0..n {
            self.reduced[j] = if self.status[j] == Status::Basic || self.up[j] == self.lo[j] {
                0.0
            } else {
                self.cost[j] - self.d.column(j).iter().zip(&y).map(|(a, y)| a * y).sum::<f64>()
            };
        }
        for i in 0..m {
            let (s, a) = (n + i, n + m + i);
            self.reduced[s] = if self.status[s] == Status::Basic { 0.0 } else { self.cost[s] - y[i] };
            self.reduced[a] = if self.status[a] == Status::Basic {
                0.0
            } else {
                self.cost[a] - self.sigma[i] * y[i]
            };
        }
    }

    fn eligible(&self, j: usize) -> bool {
        match self.status[j] {
            Status::Basic => false,
            Status::Lower => self.reduced[j] < -DUAL_TOL && self.up[j] > self.lo[j],
            Status::Upper => self.reduced[j] > DUAL_TOL && self.up[j] > self.lo[j],
        }
    }

    fn choose_entering(&self) -> Option<usize> {
        let total = self.x.len();
        if self.bland {
            return (0..total).find(|&j| self.eligible(j));
        }
        let mut best: Option<(usize, f64)> = None;
        for j in 0..total {
            if self.eligible(j) {
                let score = self.reduced[j].abs();
                if best.is_none_or(|(_, s)| score > s) {
                    best = Some((j, score));
                }
            }
        }
        best.map(|(j, _)| j)
    }

    /// Row limit for basic variable in row `r` moving at rate `delta`, with
    /// the bound relaxed by `slack`.
    fn row_limit(&self, r: usize, delta: f64, slack: f64) -> Option<(f64, bool)> {
        let b = self.basis[r];
        if delta < -PIVOT_TOL && self.lo[b].is_finite() {
            Some(((self.x[b] - self.lo[b] + slack) / -delta, false))
        } else if delta > PIVOT_TOL && self.up[b].is_finite() {
            Some(((self.up[b] - self.x[b] + slack) / delta, true))
        } else {
            None
        }
    }

    /// Returns the step and its length, or `None` if the direction is
    /// unbounded.
    fn ratio_test(&self, q: usize, deltas: &[f64]) -> Option<(Step, f64)> {
        let flip = self.up[q] - self.lo[q];
        if self.bland {
            let mut best: Option<(usize, f64, bool)> = None;
            for (r, &dl) in deltas.iter().enumerate() {
                if let Some((t, to_upper)) = self.row_limit(r, dl, 0.0) {
                    let t = t.max(0.0);
                    let better = match best {
                        None => true,
                        Some((br, bt, _)) => t < bt || (t == bt && self.basis[r] < self.basis[br]),
                    };
                    if better {
                        best = Some((r, t, to_upper));
                    }
                }
            }
            return match best {
                Some((_, t, _)) if flip <= t => Some((Step::Flip, flip)),
                Some((row, t, to_upper)) => Some((Step::Pivot { row, to_upper }, t)),
                None if flip.is_finite() => Some((Step::Flip, flip)),
                None => None,
            };
        }
        // Harris two-pass: bound the step with relaxed bounds, then take the
        // largest pivot among rows blocking within that bound.
        let mut tmax = f64::INFINITY;
        for (r, &dl) in deltas.iter().enumerate() {
            if let Some((t, _)) = self.row_limit(r, dl, PRIMAL_TOL) {
                tmax = tmax.min(t);
            }
        }
        if tmax.is_infinite() {
            return flip.is_finite().then_some((Step::Flip, flip));
        }
        if flip <= tmax {
            return Some((Step::Flip, flip));
        }
        let mut best: Option<(usize, f64, bool)> = None;
        for (r, &dl) in deltas.iter().enumerate() {
            if let Some((t, to_upper)) = self.row_limit(r, dl, 0.0) {
                if t <= tmax && best.is_none_or(|(br, _, _)| dl.abs() > deltas[br].abs()) {
                    best = Some((r, t.max(0.0), to_upper));
                }
            }
        }
        let (row, t, to_upper) = best.expect("a row attains tmax");
        Some((Step::Pivot { row, to_upper }, t))
    }

    fn pivot(&mut self, row: usize, alpha: &[f64]) {
        let m = self.m();
        let p = alpha[row];
        for c in 0..m {
            self.binv[row * m + c] /= p;
        }
        for r in 0..m {
            if r != row && alpha[r] != 0.0 {
                let f = alpha[r];
                for c in 0..m {
                    self.binv[r * m + c] -= f * self.binv[row * m + c];
                }
            }
        }
    }

    /// Recomputes `B⁻¹` from the basis columns and the basic values from
    /// the nonbasic ones.
    fn refactor(&mut self) -> Result<(), SolverError> {
        let (m, n) = (self.d.m, self.d.n);
        let mut a = vec![0.0; m * m];
        for (k, &b) in self.basis.iter().enumerate() {
            if b < n {
                for (i, v) in self.d.column(b).iter().enumerate() {
                    a[i * m + k] = *v;
                }
            } else if b < n + m {
                a[(b - n) * m + k] = 1.0;
            } else {
                a[(b - n - m) * m + k] = self.sigma[b - n - m];
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let piv = (col..m)
                .max_by(|&x, &y| a[x * m + col].abs().total_cmp(&a[y * m + col].abs()))
                .expect("nonempty");
            if a[piv * m + col].abs() < 1e-11 {
                return Err(SolverError::NumericalSingularity);
            }
            if piv != col {
                for c in 0..m {
                    a.swap(piv * m + c, col * m + c);
                    inv.swap(piv * m + c, col * m + c);
                }
            }
            let p = a[col * m + col];
            for c in 0..m {
                a[col * m + c] /= p;
                inv[col * m + c] /= p;
            }
            for r in 0..m {
                let f = a[r * m + col];
                if r != col && f != 0.0 {
                    for c in 0..m {
                        a[r * m + c] -= f * a[col * m + c];
                        inv[r * m + c] -= f * inv[col * m + c];
                    }
                }
            }
        }
        self.binv = inv;

        let mut rhs = self.d.rhs.clone();
        for j in 0..self.x.len() {
            if self.status[j] != Status::Basic && self.x[j] != 0.0 {
                let xj = self.x[j];
                if j < n {
                    for (r, a) in rhs.iter_mut().zip(self.d.column(j)) {
                        *r -= a * xj;
                    }
                } else if j < n + m {
                    rhs[j - n] -= xj;
                } else {
                    rhs[j - n - m] -= self.sigma[j - n - m] * xj;
                }
            }
        }
        for r in 0..m {
            let row = &self.binv[r * m..(r + 1) * m];
            self.x[self.basis[r]] = row.iter().zip(&rhs).map(|(b, v)| b * v).sum();
        }
        self.since_refactor = 0;
        Ok(())
    }

    fn iterate(&mut self, deadline: Option<Instant>) -> Result<LpStatus, SolverError> {
        let limit = 50_000 + 200 * self.x.len() as u64;
        let start = self.iterations;
        self.degenerate_run = 0;
        self.bland = false;
        self.price();
        loop {
            if self.iterations - start > limit {
                return Err(SolverError::IterationLimit(limit));
            }
            if self.iterations.is_multiple_of(32) && deadline.is_some_and(|d| Instant::now() >= d) {
                return Ok(LpStatus::TimeLimit);
            }
            let Some(q) = self.choose_entering() else {
                return Ok(LpStatus::Optimal);
            };
            let alpha = self.ftran(q);
            let dir = if self.status[q] == Status::Lower { 1.0 } else { -1.0 };
            let deltas: Vec<f64> = alpha.iter().map(|a| -dir * a).collect();
            let Some((step, t)) = self.ratio_test(q, &deltas) else {
                return Ok(LpStatus::Unbounded);
            };
            self.iterations += 1;
            if t <= 1e-12 {
                self.degenerate_run += 1;
                if self.degenerate_run > DEGENERATE_BEFORE_BLAND {
                    self.bland = true;
                }
            } else {
                self.degenerate_run = 0;
            }
            if t > 0.0 {
                for (r, &dl) in deltas.iter().enumerate() {
                    self.x[self.basis[r]] += dl * t;
                }
            }
            match step {
                Step::Flip => {
                    let (x, s) = if dir > 0.0 { (self.up[q], Status::Upper) } else { (self.lo[q], Status::Lower) };
                    self.x[q] = x;
                    self.status[q] = s;
                }
                Step::Pivot { row, to_upper } => {
                    self.x[q] += dir * t;
                    let leaving = self.basis[row];
                    if to_upper {
                        self.x[leaving] = self.up[leaving];
                        self.status[leaving] = Status::Upper;
                    } else {
                        self.x[leaving] = self.lo[leaving];
                        self.status[leaving] = Status::Lower;
                    }
                    self.basis[row] = q;
                    self.status[q] = Status::Basic;
                    self.pivot(row, &alpha);
                    self.since_refactor += 1;
                    if self.since_refactor >= REFACTOR_EVERY {
                        self.refactor()?;
                    }
                    self.price();
                }
            }
        }
    }

    fn run(&mut self, deadline: Option<Instant>) -> Result<LpOutcome, SolverError> {
        let (m, n) = (self.d.m, self.d.n);
        let arts = n + m..n + 2 * m;
        let initial_infeasibility: f64 = self.x[arts.clone()].iter().sum();
        if initial_infeasibility > 0.0 {
            for a in arts.clone() {
                self.cost[a] = 1.0;
            }
            match self.iterate(deadline)? {
                LpStatus::Optimal => {}
                LpStatus::TimeLimit => return Ok(self.outcome(LpStatus::TimeLimit)),
                // phase 1 is bounded below; a ray here means lost accuracy
                LpStatus::Unbounded | LpStatus::Infeasible => return Err(SolverError::NumericalSingularity),
            }
            self.refactor()?;
            let left: f64 = self.x[arts.clone()].iter().map(|v| v.max(0.0)).sum();
            if left > 1e-9 * initial_infeasibility.max(1.0) {
                return Ok(self.outcome(LpStatus::Infeasible));
            }
        }
        for a in arts {
            self.cost[a] = 0.0;
            self.up[a] = 0.0;
            if self.status[a] != Status::Basic {
                self.x[a] = 0.0;
                self.status[a] = Status::Lower;
            }
        }
        self.cost[..n].copy_from_slice(&self.d.cost);
        let status = self.iterate(deadline)?;
        if status == LpStatus::Optimal && self.since_refactor > 0 {
            self.refactor()?;
            self.price();
        }
        Ok(self.outcome(status))
    }

    /// Gomory mixed-integer cuts at an optimal basis, most fractional rows
    /// first. Nonbasic variables are shifted to their active bound so the
    /// tableau row reads `x_B + Σ â_j y_j = β` with `y ≥ 0`; slacks count as
    /// continuous. Cuts that are numerically doubtful are dropped.
    fn gomory_cuts(&self, max_cuts: usize) -> Vec<Cut> {
        let (m, n) = (self.d.m, self.d.n);
        let mut rows: Vec<(usize, f64)> = (0..m)
            .filter(|&i| self.basis[i] < n)
            .filter_map(|i| {
                let f0 = self.x[self.basis[i]] - self.x[self.basis[i]].floor();
                (f0 > 0.01 && f0 < 0.99).then_some((i, (f0 - 0.5).abs()))
            })
            .collect();
        rows.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let mut cuts = Vec::new();
        for &(i, _) in rows.iter().take(max_cuts) {
            let beta = self.x[self.basis[i]];
            let f0 = beta - beta.floor();
            let binv = &self.binv[i * m..(i + 1) * m];
            let mut coef = vec![0.0; n];
            let mut rhs = 1.0;
            for j in 0..n {
                if self.status[j] == Status::Basic || self.up[j] <= self.lo[j] {
                    continue;
                }
                let abar: f64 = binv.iter().zip(self.d.column(j)).map(|(b, a)| b * a).sum();
                let (ahat, at_upper) = match self.status[j] {
                    Status::Upper => (-abar, true),
                    _ => (abar, false),
                };
                let fj = ahat - ahat.floor();
                if fj < 1e-12 || fj > 1.0 - 1e-12 {
                    continue;
                }
                let g = if fj <= f0 { fj / f0 } else { (1.0 - fj) / (1.0 - f0) };
                if at_upper {
                    coef[j] -= g;
                    rhs -= g * self.up[j];
                } else {
                    coef[j] += g;
                    rhs += g * self.lo[j];
                }
            }
            for r in 0..m {
                let sl = n + r;
                if self.status[sl] == Status::Basic || self.up[sl] <= self.lo[sl] {
                    continue;
                }
                let (ahat, at_upper) = match self.status[sl] {
                    Status::Upper => (-binv[r], true),
                    _ => (binv[r], false),
                };
                if ahat.abs() < 1e-12 {
                    continue;
                }
                let g = if ahat > 0.0 { ahat / f0 } else { -ahat / (1.0 - f0) };
                // slack = rhs_r - A_r·x
                let a = |j: usize| self.d.cols[j * m + r];
                if at_upper {
                    for (j, c) in coef.iter_mut().enumerate() {
                        *c += g * a(j);
                    }
                    rhs -= g * (self.up[sl] - self.d.rhs[r]);
                } else {
                    for (j, c) in coef.iter_mut().enumerate() {
                        *c -= g * a(j);
                    }
                    rhs -= g * (self.d.rhs[r] - self.lo[sl]);
                }
            }
            if let Some(cut) = self.clean_cut(coef, rhs) {
                cuts.push(cut);
            }
        }
        cuts
    }

    /// Drops negligible coefficients (moving their worst case into the
    /// right-hand side), relaxes the right-hand side slightly and keeps the
    /// cut only if it is well scaled and separates the current point.
    fn clean_cut(&self, mut coef: Vec<f64>, mut rhs: f64) -> Option<Cut> {
        let n = self.d.n;
        let big = coef.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        if !(big > 1e-9) || !rhs.is_finite() {
            return None;
        }
        for j in 0..n {
            let c = coef[j];
            if c != 0.0 && c.abs() < 1e-9 * big {
                rhs -= if c > 0.0 { c * self.up[j] } else { c * self.lo[j] };
                coef[j] = 0.0;
            }
        }
        let small = coef.iter().filter(|c| **c != 0.0).fold(f64::INFINITY, |a, c| a.min(c.abs()));
        if big / small > 1e6 {
            return None;
        }
        for c in coef.iter_mut() {
            *c /= big;
        }
        rhs /= big;
        rhs -= 1e-9 * rhs.abs().max(1.0);
        let lhs: f64 = coef.iter().zip(&self.x[..n]).map(|(c, x)| c * x).sum();
        (lhs < rhs - 1e-6).then_some(Cut { coef, rhs })
    }

    fn outcome(&self, status: LpStatus) -> LpOutcome {
        let n = self.d.n;
        let x: Vec<f64> = (0..n).map(|j| self.x[j].clamp(self.lo[j], self.up[j])).collect();
        let objective = x.iter().zip(&self.d.cost).map(|(x, c)| x * c).sum();
        let reduced = if status == LpStatus::Optimal {
            self.reduced[..n].to_vec()
        } else {
            Vec::new()
        };
        LpOutcome {
            status,
            x,
            objective,
            iterations: self.iterations,
            reduced,
        }
    }
}

impl LpData {
    fn column(&self, j: usize) -> &[f64] {
        &self.cols[j * self.m..(j + 1) * self.m]
    }
}
