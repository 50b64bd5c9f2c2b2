//! Independent oracles for the integration suites: a small query model that
//! renders to PaQL text and evaluates aggregates straight from the data,
//! exhaustive enumeration over multiplicity vectors, and a feasibility check
//! driven by the parsed AST rather than the ILP translation.

#![allow(dead_code)]

use std::collections::HashMap;
use std::fmt::Write as _;

use packq::eval::Package;
use packq::paql::{AggregateExpr, Bound, GlobalOp, PackageQuery, Sense};
use packq::Relation;
use rand::Rng;

/// Numeric columns `a0..` plus a categorical column `c`.
#[derive(Debug, Clone)]
pub struct Data {
    pub cols: Vec<Vec<f64>>,
    pub cat: Vec<String>,
}

impl Data {
    pub fn random(rng: &mut impl Rng, n: usize, k: usize, lo: f64, hi: f64, step: f64) -> Data {
        let cols = (0..k)
            .map(|_| (0..n).map(|_| (rng.random_range(lo..=hi) / step).round() * step).collect())
            .collect();
        let cat = (0..n).map(|_| ["x", "y", "z"][rng.random_range(0..3)].to_string()).collect();
        Data { cols, cat }
    }

    pub fn len(&self) -> usize {
        self.cat.len()
    }

    pub fn relation(&self) -> Relation {
        let mut csv = String::new();
        for j in 0..self.cols.len() {
            let _ = write!(csv, "a{j},");
        }
        csv.push_str("c\n");
        for i in 0..self.len() {
            for col in &self.cols {
                let _ = write!(csv, "{},", col[i]);
            }
            let _ = writeln!(csv, "{}", self.cat[i]);
        }
        Relation::read_csv(csv.as_bytes(), "R", &HashMap::new()).expect("generated CSV loads")
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Filter {
    pub attr: usize,
    pub ge: bool,
    pub v: f64,
}

impl Filter {
    fn holds(&self, d: &Data, i: usize) -> bool {
        let x = d.cols[self.attr][i];
        if self.ge {
            x >= self.v
        } else {
            x <= self.v
        }
    }

    fn text(&self) -> String {
        format!(
            "(SELECT COUNT(*) FROM P WHERE P.a{} {} {})",
            self.attr,
            if self.ge { ">=" } else { "<=" },
            self.v
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Agg {
    Count,
    Sum(usize),
    Avg(usize),
    Filtered(Filter),
}

impl Agg {
    fn text(&self) -> String {
        match self {
            Agg::Count => "COUNT(P.*)".into(),
            Agg::Sum(a) => format!("SUM(P.a{a})"),
            Agg::Avg(a) => format!("AVG(P.a{a})"),
            Agg::Filtered(f) => f.text(),
        }
    }

    /// Per-tuple weight of a linear aggregate.
    fn weight(&self, d: &Data, i: usize) -> f64 {
        match self {
            Agg::Count | Agg::Avg(_) => 1.0,
            Agg::Sum(a) => d.cols[*a][i],
            Agg::Filtered(f) => f64::from(u8::from(f.holds(d, i))),
        }
    }

    /// `(Σ value·x, Σ x, Σ |value·x|)` over the package.
    fn totals(&self, d: &Data, x: &[u64]) -> (f64, f64, f64) {
        let (mut total, mut count, mut mag) = (0.0, 0.0, 0.0);
        for (i, &m) in x.iter().enumerate() {
            if m == 0 {
                continue;
            }
            let v = match self {
                Agg::Avg(a) => d.cols[*a][i],
                _ => self.weight(d, i),
            };
            total += v * m as f64;
            count += m as f64;
            mag += (v * m as f64).abs();
        }
        (total, count, mag)
    }

    pub fn value(&self, d: &Data, x: &[u64]) -> f64 {
        self.totals(d, x).0
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Rhs {
    Cmp(GlobalOp, f64),
    Between(f64, f64),
    /// Filtered count against filtered count.
    Agg(GlobalOp, Filter),
}

#[derive(Debug, Clone, Copy)]
pub struct Pred {
    pub lhs: Agg,
    pub rhs: Rhs,
}

fn holds(op: GlobalOp, lhs: f64, rhs: f64, mag: f64) -> bool {
    let tol = 1e-9 * mag.max(1.0);
    match op {
        GlobalOp::Le => lhs <= rhs + tol,
        GlobalOp::Ge => lhs >= rhs - tol,
        GlobalOp::Eq => (lhs - rhs).abs() <= tol,
    }
}

impl Pred {
    fn text(&self) -> String {
        let l = self.lhs.text();
        match self.rhs {
            Rhs::Cmp(op, v) => format!("{l} {} {v}", op.symbol()),
            Rhs::Between(a, b) => format!("{l} BETWEEN {a} AND {b}"),
            Rhs::Agg(op, f) => format!("{l} {} {}", op.symbol(), f.text()),
        }
    }

    /// Evaluates the predicate from the aggregate values. AVG over an empty
    /// package satisfies every comparison.
    pub fn satisfied(&self, d: &Data, x: &[u64]) -> bool {
        let (total, count, mag) = self.lhs.totals(d, x);
        let cmp = |op: GlobalOp, v: f64| match self.lhs {
            // AVG ⊙ v compared as Σ value·x ⊙ v·Σ x, exact for the empty package
            Agg::Avg(_) => holds(op, total, v * count, mag + (v * count).abs()),
            _ => holds(op, total, v, mag + v.abs()),
        };
        match self.rhs {
            Rhs::Cmp(op, v) => cmp(op, v),
            Rhs::Between(a, b) => cmp(GlobalOp::Ge, a) && cmp(GlobalOp::Le, b),
            Rhs::Agg(op, f) => {
                let other = Agg::Filtered(f).value(d, x);
                holds(op, total, other, mag + other)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum Base {
    Category(String),
    Numeric(Filter),
}

#[derive(Debug, Clone)]
pub struct Query {
    pub repeat: Option<u64>,
    pub base: Option<Base>,
    pub preds: Vec<Pred>,
    pub objective: Option<(Sense, Agg)>,
}

impl Query {
    pub fn text(&self) -> String {
        let mut s = "SELECT PACKAGE(R) AS P FROM R R".to_string();
        if let Some(k) = self.repeat {
            let _ = write!(s, " REPEAT {k}");
        }
        match &self.base {
            Some(Base::Category(c)) => {
                let _ = write!(s, " WHERE R.c = '{c}'");
            }
            Some(Base::Numeric(f)) => {
                let _ = write!(s, " WHERE R.a{} {} {}", f.attr, if f.ge { ">=" } else { "<=" }, f.v);
            }
            None => {}
        }
        for (i, p) in self.preds.iter().enumerate() {
            s.push_str(if i == 0 { " SUCH THAT " } else { " AND " });
            s.push_str(&p.text());
        }
        if let Some((sense, agg)) = &self.objective {
            let _ = write!(s, " {} {}", sense.keyword(), agg.text());
        }
        s
    }

    pub fn admits(&self, d: &Data, i: usize) -> bool {
        match &self.base {
            None => true,
            Some(Base::Category(c)) => d.cat[i] == *c,
            Some(Base::Numeric(f)) => f.holds(d, i),
        }
    }

    /// Whether the multiplicity vector over all tuples answers the query.
    pub fn satisfied(&self, d: &Data, x: &[u64]) -> bool {
        let cap = self.repeat.map(|k| k + 1);
        x.iter()
            .enumerate()
            .all(|(i, &m)| m == 0 || (self.admits(d, i) && cap.is_none_or(|c| m <= c)))
            && self.preds.iter().all(|p| p.satisfied(d, x))
    }

    pub fn objective_value(&self, d: &Data, x: &[u64]) -> f64 {
        self.objective.as_ref().map_or(0.0, |(_, agg)| agg.value(d, x))
    }

    pub fn sense(&self) -> Sense {
        self.objective.as_ref().map_or(Sense::Maximize, |(s, _)| *s)
    }
}

/// Best objective over every multiplicity vector with entries in
/// `0..=REPEAT+1` on admitted tuples; `None` when no vector is feasible.
pub fn enumerate_optimum(d: &Data, q: &Query) -> Option<f64> {
    let cap = q.repeat.expect("enumeration needs REPEAT") + 1;
    let vars: Vec<usize> = (0..d.len()).filter(|&i| q.admits(d, i)).collect();
    let mut x = vec![0u64; d.len()];
    let mut best: Option<f64> = None;
    loop {
        if q.satisfied(d, &x) {
            let v = q.objective_value(d, &x);
            let better = match (best, q.sense()) {
                (None, _) => true,
                (Some(b), Sense::Maximize) => v > b,
                (Some(b), Sense::Minimize) => v < b,
            };
            if better {
                best = Some(v);
            }
        }
        // odometer over the admitted tuples
        let mut pos = 0;
        loop {
            if pos == vars.len() {
                return best;
            }
            let i = vars[pos];
            if x[i] < cap {
                x[i] += 1;
                break;
            }
            x[i] = 0;
            pos += 1;
        }
    }
}

fn pick_op(rng: &mut impl Rng) -> GlobalOp {
    [GlobalOp::Le, GlobalOp::Ge, GlobalOp::Eq][rng.random_range(0..3)]
}

fn random_filter(rng: &mut impl Rng, d: &Data) -> Filter {
    let attr = rng.random_range(0..d.cols.len());
    let col = &d.cols[attr];
    Filter {
        attr,
        ge: rng.random_bool(0.5),
        v: col[rng.random_range(0..col.len())],
    }
}

/// A random query over `d` mixing every global predicate form. Bounds are
/// scaled to a package of one to three tuples so that both feasible and
/// infeasible instances occur.
pub fn random_query(rng: &mut impl Rng, d: &Data, repeat: Option<u64>) -> Query {
    let k = d.cols.len();
    let size = rng.random_range(1..=3) as f64;
    let mean = |a: usize| d.cols[a].iter().sum::<f64>() / d.len() as f64;
    let round = |v: f64| (v * 4.0).round() / 4.0;
    let base = match rng.random_range(0..4) {
        0 => Some(Base::Category(["x", "y", "z"][rng.random_range(0..3)].to_string())),
        1 => Some(Base::Numeric(random_filter(rng, d))),
        _ => None,
    };
    let mut preds = Vec::new();
    for _ in 0..rng.random_range(0..=3) {
        let lhs = match rng.random_range(0..4) {
            0 => Agg::Count,
            1 => Agg::Sum(rng.random_range(0..k)),
            2 => Agg::Avg(rng.random_range(0..k)),
            _ => Agg::Filtered(random_filter(rng, d)),
        };
        let centre = match lhs {
            Agg::Count => size,
            Agg::Sum(a) => size * mean(a),
            Agg::Avg(a) => mean(a),
            Agg::Filtered(_) => size / 2.0,
        };
        let spread = centre.abs().max(1.0);
        let v = round(centre + rng.random_range(-spread..=spread));
        let rhs = match (lhs, rng.random_range(0..5)) {
            (Agg::Filtered(_), 0) => Rhs::Agg(pick_op(rng), random_filter(rng, d)),
            (Agg::Count | Agg::Filtered(_), _) => Rhs::Cmp(pick_op(rng), v.round()),
            (_, 0 | 1) => Rhs::Between(v, round(v + rng.random_range(0.0..=spread))),
            // equality on real sums is rarely satisfiable; keep it to counts
            _ => Rhs::Cmp(if rng.random_bool(0.5) { GlobalOp::Le } else { GlobalOp::Ge }, v),
        };
        preds.push(Pred { lhs, rhs });
    }
    let objective = match rng.random_range(0..5) {
        0 => None,
        1 => Some((if rng.random_bool(0.5) { Sense::Maximize } else { Sense::Minimize }, Agg::Count)),
        _ => Some((
            if rng.random_bool(0.5) { Sense::Maximize } else { Sense::Minimize },
            Agg::Sum(rng.random_range(0..k)),
        )),
    };
    Query {
        repeat,
        base,
        preds,
        objective,
    }
}

fn ast_value(expr: &AggregateExpr, rel: &Relation, pkg: &Package) -> (f64, f64, f64) {
    let (mut total, mut count, mut mag) = (0.0, 0.0, 0.0);
    let resolved = match expr {
        AggregateExpr::FilteredCount(p) => Some(p.resolve(rel.schema()).expect("predicate resolves")),
        _ => None,
    };
    for (id, m) in pkg.iter() {
        let v = match expr {
            AggregateExpr::CountStar => 1.0,
            AggregateExpr::Sum(a) | AggregateExpr::Avg(a) => rel.numeric_by_name(a).expect("numeric")[id],
            AggregateExpr::FilteredCount(_) => f64::from(u8::from(resolved.as_ref().unwrap().matches(rel, id))),
        };
        total += v * m as f64;
        count += m as f64;
        mag += (v * m as f64).abs();
    }
    (total, count, mag)
}

/// Feasibility of `pkg` for the parsed query, evaluating each global
/// predicate from its aggregates. Does not use the ILP translation.
pub fn ast_feasible(q: &PackageQuery, rel: &Relation, pkg: &Package) -> bool {
    if let Some(k) = q.repeat {
        if pkg.iter().any(|(_, m)| m > k + 1) {
            return false;
        }
    }
    if let Some(base) = &q.base_predicate {
        let base = base.resolve(rel.schema()).expect("predicate resolves");
        if pkg.iter().any(|(id, _)| !base.matches(rel, id)) {
            return false;
        }
    }
    q.global_predicates.iter().all(|p| {
        let (total, count, mag) = ast_value(&p.lhs, rel, pkg);
        let avg = matches!(p.lhs, AggregateExpr::Avg(_));
        let cmp = |op: GlobalOp, v: f64| {
            if avg {
                holds(op, total, v * count, mag + (v * count).abs())
            } else {
                holds(op, total, v, mag + v.abs())
            }
        };
        match &p.bound {
            Bound::Cmp(op, v) => cmp(*op, *v),
            Bound::Between(a, b) => cmp(GlobalOp::Ge, *a) && cmp(GlobalOp::Le, *b),
            Bound::Aggregate(op, other) => {
                let (o, _, om) = ast_value(other, rel, pkg);
                holds(*op, total, o, mag + om)
            }
        }
    })
}
