//! Integer linear programs built from package queries, and the inverse
//! mapping from a raw ILP to a relation plus query.

mod raw;

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::paql::{CheckedQuery, GlobalOp, Sense};
use crate::relation::Relation;

pub use raw::{ilp_to_paql, RawIlp};

pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("unbounded repetition: add REPEAT or a bounding global constraint (tuple {tuple_id} has no upper bound)")]
    UnboundedRepetition { tuple_id: usize },
    #[error("expected {expected} multiplicities, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid ILP instance: {0}")]
    InvalidInstance(String),
}

/// One non-negative integer decision variable: the multiplicity of a tuple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Variable {
    pub tuple_id: usize,
    pub lower: u64,
    /// `None` is `+∞`.
    pub upper: Option<u64>,
}

/// `Σ coefficients[v]·x[v]  op  rhs`, with coefficients aligned to the
/// model's variables.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub coefficients: Vec<f64>,
    pub op: GlobalOp,
    pub rhs: f64,
    /// Index of the global predicate this constraint came from.
    pub source: Option<usize>,
}

impl LinearConstraint {
    pub fn lhs(&self, x: &[u64]) -> f64 {
        self.coefficients
            .iter()
            .zip(x)
            .filter(|(_, &v)| v != 0)
            .map(|(a, &v)| a * v as f64)
            .sum()
    }

    /// Whether `x` satisfies the constraint. Integral data is compared
    /// exactly; otherwise with slack `1e-9·max(1, Σ|a·x|, |rhs|)`.
    pub fn satisfied_by(&self, x: &[u64]) -> bool {
        let mut lhs = 0.0;
        let mut mag = self.rhs.abs();
        let mut integral = self.rhs.fract() == 0.0;
        for (a, &v) in self.coefficients.iter().zip(x) {
            if v != 0 {
                let t = a * v as f64;
                lhs += t;
                mag += t.abs();
                integral &= a.fract() == 0.0;
            }
        }
        let tol = if integral && mag < 2f64.powi(52) {
            0.0
        } else {
            FEASIBILITY_TOL * mag.max(1.0)
        };
        self.op.holds(lhs, self.rhs, tol)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IlpModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<LinearConstraint>,
    pub sense: Sense,
    /// Objective coefficients aligned to `variables`. All zero with
    /// `Maximize` is the vacuous objective.
    pub objective: Vec<f64>,
}

impl IlpModel {
    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn objective_value(&self, x: &[u64]) -> f64 {
        self.objective
            .iter()
            .zip(x)
            .filter(|(_, &v)| v != 0)
            .map(|(c, &v)| c * v as f64)
            .sum()
    }

    pub fn is_vacuous(&self) -> bool {
        self.objective.iter().all(|&c| c == 0.0)
    }

    pub fn has_finite_bounds(&self) -> bool {
        self.variables.iter().all(|v| v.upper.is_some())
    }

    /// Non-zero entries of `x` as `(tuple id, multiplicity)`.
    pub fn package_of(&self, x: &[u64]) -> Vec<(usize, u64)> {
        self.variables
            .iter()
            .zip(x)
            .filter(|(_, &m)| m > 0)
            .map(|(v, &m)| (v.tuple_id, m))
            .collect()
    }

    /// Keeps only the variables at `keep` (indices into `variables`).
    pub fn select_vars(&self, keep: &[usize]) -> IlpModel {
        IlpModel {
            variables: keep.iter().map(|&i| self.variables[i]).collect(),
            constraints: self
                .constraints
                .iter()
                .map(|c| LinearConstraint {
                    coefficients: keep.iter().map(|&i| c.coefficients[i]).collect(),
                    op: c.op,
                    rhs: c.rhs,
                    source: c.source,
                })
                .collect(),
            sense: self.sense,
            objective: keep.iter().map(|&i| self.objective[i]).collect(),
        }
    }

    /// Human-readable LP-format dump.
    pub fn to_lp_string(&self) -> String {
        let mut s = String::new();
        let term = |s: &mut String, first: bool, a: f64, i: usize| {
            let sign = if a < 0.0 { " -" } else if first { "" } else { " +" };
            let _ = write!(s, "{sign} {} x{i}", a.abs());
        };
        s.push_str(match self.sense {
            Sense::Maximize => "Maximize\n obj:",
            Sense::Minimize => "Minimize\n obj:",
        });
        let mut first = true;
        for (i, &c) in self.objective.iter().enumerate() {
            if c != 0.0 {
                term(&mut s, first, c, i);
                first = false;
            }
        }
        if first {
            s.push_str(" 0");
        }
        s.push_str("\nSubject To\n");
        for (j, c) in self.constraints.iter().enumerate() {
            let _ = write!(s, " c{j}:");
            let mut first = true;
            for (i, &a) in c.coefficients.iter().enumerate() {
                if a != 0.0 {
                    term(&mut s, first, a, i);
                    first = false;
                }
            }
            if first {
                s.push_str(" 0 x0");
            }
            let _ = writeln!(s, " {} {}", c.op, c.rhs);
        }
        s.push_str("Bounds\n");
        for (i, v) in self.variables.iter().enumerate() {
            match v.upper {
                Some(u) => {
                    let _ = writeln!(s, " {} <= x{i} <= {u}", v.lower);
                }
                None => {
                    let _ = writeln!(s, " x{i} >= {}", v.lower);
                }
            }
        }
        s.push_str("General\n");
        for i in 0..self.variables.len() {
            let _ = write!(s, " x{i}");
        }
        s.push_str("\nEnd\n");
        s
    }
}

impl fmt::Display for IlpModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_lp_string())
    }
}

/// Translates a validated query over the whole relation. Tuples failing
/// the base predicate get no variable.
pub fn translate(q: &CheckedQuery, rel: &Relation) -> IlpModel {
    let ids: Vec<usize> = (0..rel.len()).collect();
    translate_over(q, rel, &ids)
}

/// Translates `q` with one variable per id in `ids` that passes the base
/// predicate, in the given order.
pub fn translate_over(q: &CheckedQuery, rel: &Relation, ids: &[usize]) -> IlpModel {
    let ids: Vec<usize> = match &q.base {
        Some(p) => ids.iter().copied().filter(|&id| p.matches(rel, id)).collect(),
        None => ids.to_vec(),
    };
    let upper = q.repeat.map(|k| k.saturating_add(1));
    let variables = ids
        .iter()
        .map(|&tuple_id| Variable {
            tuple_id,
            lower: 0,
            upper,
        })
        .collect();
    let constraints = q
        .constraints
        .iter()
        .map(|c| LinearConstraint {
            coefficients: ids.iter().map(|&id| c.coefficient(rel, id)).collect(),
            op: c.op,
            rhs: c.rhs_value(),
            source: Some(c.source),
        })
        .collect();
    IlpModel {
        variables,
        constraints,
        sense: q.sense(),
        objective: ids.iter().map(|&id| q.objective_coefficient(rel, id)).collect(),
    }
}

/// `Σ a·x ≤ U` with every `a ≥ 0`, in normalized form, for each constraint
/// that has one (`=` counts; `≥` with every `a ≤ 0` is negated).
fn packing_rows(m: &IlpModel) -> impl Iterator<Item = (f64, Vec<f64>)> + '_ {
    m.constraints.iter().filter_map(|c| {
        let nonneg = c.coefficients.iter().all(|&a| a >= 0.0);
        let nonpos = c.coefficients.iter().all(|&a| a <= 0.0);
        match c.op {
            GlobalOp::Le | GlobalOp::Eq if nonneg => Some((1.0, c.rhs)),
            GlobalOp::Ge | GlobalOp::Eq if nonpos => Some((-1.0, -c.rhs)),
            _ => None,
        }
        .map(|(s, u)| (u, c.coefficients.iter().map(|&a| s * a).collect()))
    })
}

/// Tightens every variable's upper bound with `⌊U/a⌋` from each packing
/// constraint `Σ a·x ≤ U` (all `a ≥ 0`) in which it has `a > 0`.
pub fn tighten_bounds(m: &IlpModel) -> IlpModel {
    let mut out = m.clone();
    for (u, row) in packing_rows(m) {
        for (v, &a) in out.variables.iter_mut().zip(&row) {
            if a > 0.0 {
                let b = (u / a).floor();
                let b = if b <= 0.0 {
                    0
                } else if b >= u64::MAX as f64 {
                    u64::MAX
                } else {
                    b as u64
                };
                v.upper = Some(v.upper.map_or(b, |old| old.min(b)));
            }
        }
    }
    out
}

/// Gives every unbounded variable a finite upper bound, failing when some
/// variable is not bounded by any packing constraint.
pub fn derive_bounds(m: &IlpModel) -> Result<IlpModel, ModelError> {
    let unbounded: Vec<usize> = (0..m.num_vars()).filter(|&i| m.variables[i].upper.is_none()).collect();
    if unbounded.is_empty() {
        return Ok(m.clone());
    }
    let mut out = m.clone();
    let tight = tighten_bounds(m);
    for i in unbounded {
        match tight.variables[i].upper {
            Some(u) => out.variables[i].upper = Some(u),
            None => {
                return Err(ModelError::UnboundedRepetition {
                    tuple_id: m.variables[i].tuple_id,
                })
            }
        }
    }
    Ok(out)
}

/// Whether the multiplicity vector `x` satisfies every bound and constraint.
pub fn feasible(m: &IlpModel, x: &[u64]) -> Result<bool, ModelError> {
    if x.len() != m.num_vars() {
        return Err(ModelError::LengthMismatch {
            expected: m.num_vars(),
            found: x.len(),
        });
    }
    let in_bounds = m
        .variables
        .iter()
        .zip(x)
        .all(|(v, &xi)| xi >= v.lower && v.upper.is_none_or(|u| xi <= u));
    Ok(in_bounds && m.constraints.iter().all(|c| c.satisfied_by(x)))
}
