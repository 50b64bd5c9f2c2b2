//! Synthetic relations and random package-query workloads.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::ilp::RawIlp;
use crate::paql::Sense;
use crate::relation::Relation;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkloadError {
    #[error("invalid distribution `{0}` (expected uniform:LO:HI or normal:MEAN:STD)")]
    BadDistribution(String),
    #[error("invalid workload parameter: {0}")]
    BadParameter(String),
}

/// Value distribution of one generated column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ColumnDist {
    Uniform { lo: f64, hi: f64 },
    Normal { mean: f64, std: f64 },
}

impl ColumnDist {
    fn check(&self) -> Result<(), WorkloadError> {
        let ok = match *self {
            ColumnDist::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
            ColumnDist::Normal { mean, std } => mean.is_finite() && std.is_finite() && std >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(WorkloadError::BadDistribution(self.to_string()))
        }
    }
}

impl std::fmt::Display for ColumnDist {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ColumnDist::Uniform { lo, hi } => write!(f, "uniform:{lo}:{hi}"),
            ColumnDist::Normal { mean, std } => write!(f, "normal:{mean}:{std}"),
        }
    }
}

impl FromStr for ColumnDist {
    type Err = WorkloadError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || WorkloadError::BadDistribution(s.to_string());
        let parts: Vec<&str> = s.split(':').collect();
        let [kind, a, b] = parts.as_slice() else {
            return Err(bad());
        };
        let a: f64 = a.trim().parse().map_err(|_| bad())?;
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        let d = match kind.trim().to_ascii_lowercase().as_str() {
            "uniform" => ColumnDist::Uniform { lo: a, hi: b },
            "normal" => ColumnDist::Normal { mean: a, std: b },
            _ => return Err(bad()),
        };
        d.check().map_err(|_| bad())?;
        Ok(d)
    }
}

/// Name of generated column `i`.
pub fn column_name(i: usize) -> String {
    format!("a{i}")
}

/// `rows × dists.len()` relation named `name` with columns `a0, a1, …`.
/// Column `j` is drawn from `dists[j]`.
pub fn generate_relation(name: &str, rows: usize, dists: &[ColumnDist], seed: u64) -> Result<Relation, WorkloadError> {
    if dists.is_empty() {
        return Err(WorkloadError::BadParameter("at least one column is required".into()));
    }
    for d in dists {
        d.check()?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = vec![Vec::with_capacity(dists.len()); rows];
    for d in dists {
        match *d {
            ColumnDist::Uniform { lo, hi } => {
                for row in data.iter_mut() {
                    row.push(rng.random_range(lo..hi));
                }
            }
            ColumnDist::Normal { mean, std } => {
                let n = Normal::new(mean, std).map_err(|_| WorkloadError::BadDistribution(d.to_string()))?;
                for row in data.iter_mut() {
                    row.push(n.sample(&mut rng));
                }
            }
        }
    }
    let names: Vec<String> = (0..dists.len()).map(column_name).collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    Relation::from_numeric_rows(name, &names, &data).map_err(|e| WorkloadError::BadParameter(e.to_string()))
}

/// Settings for random query generation.
#[derive(Debug, Clone, PartialEq)]
pub struct QuerySpec {
    /// Attributes that receive a random SUM constraint.
    pub sum_attrs: Vec<String>,
    /// Attribute of `SUM` in the objective.
    pub objective_attr: String,
    pub sense: Sense,
    /// Expected package size used to scale the random bounds.
    pub expected_size: f64,
    pub repeat: Option<u64>,
    /// Upper bound on COUNT; `None` adds only `COUNT(P.*) >= 1`.
    pub max_count: Option<u64>,
}

fn value_range(rel: &Relation, attr: &str) -> Result<(f64, f64), WorkloadError> {
    let col = rel
        .numeric_by_name(attr)
        .map_err(|e| WorkloadError::BadParameter(e.to_string()))?;
    if col.is_empty() {
        return Err(WorkloadError::BadParameter("relation is empty".into()));
    }
    Ok(col.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v))))
}

fn write_header(s: &mut String, rel: &Relation, repeat: Option<u64>) {
    let _ = write!(s, "SELECT PACKAGE(R) AS P FROM {} R", rel.schema().name());
    if let Some(k) = repeat {
        let _ = write!(s, " REPEAT {k}");
    }
}

/// A random query: `COUNT(P.*) >= 1` plus, per SUM attribute, a bound
/// drawn as a uniform value from the attribute's range times the expected
/// package size. The bound is an upper bound or a lower bound with equal
/// probability.
pub fn random_query(rel: &Relation, spec: &QuerySpec, rng: &mut impl Rng) -> Result<String, WorkloadError> {
    if !(spec.expected_size > 0.0) {
        return Err(WorkloadError::BadParameter("expected size must be positive".into()));
    }
    let mut s = String::new();
    write_header(&mut s, rel, spec.repeat);
    s.push_str(" SUCH THAT COUNT(P.*) >= 1");
    if let Some(c) = spec.max_count {
        let _ = write!(s, " AND COUNT(P.*) <= {c}");
    }
    for attr in &spec.sum_attrs {
        let (lo, hi) = value_range(rel, attr)?;
        let v = if hi > lo { rng.random_range(lo..=hi) } else { lo };
        let bound = v * spec.expected_size;
        let op = if rng.random_bool(0.5) { "<=" } else { ">=" };
        let _ = write!(s, " AND SUM(P.{attr}) {op} {bound}");
    }
    value_range(rel, &spec.objective_attr)?;
    let _ = write!(s, " {} SUM(P.{})", spec.sense.keyword(), spec.objective_attr);
    Ok(s)
}

/// `count` random queries from one seed.
pub fn random_workload(rel: &Relation, spec: &QuerySpec, count: usize, seed: u64) -> Result<Vec<String>, WorkloadError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_query(rel, spec, &mut rng)).collect()
}

/// Five queries shaped after common benchmark templates over the numeric
/// attributes `attrs = [x, y, z, w]`:
///
/// 1. `SUM(x) <= b, SUM(y) <= b, SUM(z) <= b`, maximize `SUM(w)`
/// 2. `SUM(x) >= b`, minimize `SUM(y)`
/// 3. `SUM(y) >= b`, minimize `COUNT(P.*)`
/// 4. `SUM(x) <= b, SUM(z) >= b`, minimize `COUNT(P.*)`
/// 5. `COUNT(P.*) BETWEEN c AND c'`, maximize `SUM(w)`
///
/// Every query also has `COUNT(P.*) >= 1`. SUM bounds are drawn as in
/// [`random_query`]; the COUNT range has `c` uniform in `1..=size` and
/// `c' - c` uniform in `0..=size`, for `size` the rounded expected size.
pub fn template_workload(
    rel: &Relation,
    attrs: &[String],
    expected_size: f64,
    repeat: Option<u64>,
    seed: u64,
) -> Result<Vec<String>, WorkloadError> {
    let [x, y, z, w] = attrs else {
        return Err(WorkloadError::BadParameter(format!("need 4 attributes, got {}", attrs.len())));
    };
    if !(expected_size >= 1.0) {
        return Err(WorkloadError::BadParameter("expected size must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bound = |attr: &str| -> Result<f64, WorkloadError> {
        let (lo, hi) = value_range(rel, attr)?;
        let v = if hi > lo { rng.random_range(lo..=hi) } else { lo };
        Ok(v * expected_size)
    };
    let b1 = [bound(x)?, bound(y)?, bound(z)?];
    let b2 = bound(x)?;
    let b3 = bound(y)?;
    let b4 = [bound(x)?, bound(z)?];
    let size = expected_size.round() as u64;
    let c = rng.random_range(1..=size);
    let c2 = c + rng.random_range(0..=size);
    let bodies = [
        format!(
            "SUM(P.{x}) <= {} AND SUM(P.{y}) <= {} AND SUM(P.{z}) <= {} MAXIMIZE SUM(P.{w})",
            b1[0], b1[1], b1[2]
        ),
        format!("SUM(P.{x}) >= {b2} MINIMIZE SUM(P.{y})"),
        format!("SUM(P.{y}) >= {b3} MINIMIZE COUNT(P.*)"),
        format!("SUM(P.{x}) <= {} AND SUM(P.{z}) >= {} MINIMIZE COUNT(P.*)", b4[0], b4[1]),
        format!("COUNT(P.*) BETWEEN {c} AND {c2} MAXIMIZE SUM(P.{w})"),
    ];
    Ok(bodies
        .iter()
        .map(|body| {
            let mut s = String::new();
            write_header(&mut s, rel, repeat);
            let _ = write!(s, " SUCH THAT COUNT(P.*) >= 1 AND {body}");
            s
        })
        .collect())
}

/// A query guaranteed feasible: draws a random package of `size` distinct
/// tuples and bounds each SUM within `slack` (relative) of the package's
/// own sums, with COUNT between 1 and `2·size`.
pub fn planted_query(
    rel: &Relation,
    sum_attrs: &[String],
    objective_attr: &str,
    sense: Sense,
    size: usize,
    slack: f64,
    rng: &mut impl Rng,
) -> Result<(String, Vec<usize>), WorkloadError> {
    if size == 0 || size > rel.len() {
        return Err(WorkloadError::BadParameter(format!("package size {size} for {} tuples", rel.len())));
    }
    let mut ids = sample(rng, rel.len(), size).into_vec();
    ids.sort_unstable();
    let mut s = String::new();
    write_header(&mut s, rel, Some(0));
    let _ = write!(s, " SUCH THAT COUNT(P.*) BETWEEN 1 AND {}", 2 * size);
    for attr in sum_attrs {
        let col = rel
            .numeric_by_name(attr)
            .map_err(|e| WorkloadError::BadParameter(e.to_string()))?;
        let total: f64 = ids.iter().map(|&i| col[i]).sum();
        let d = slack * total.abs();
        let _ = write!(s, " AND SUM(P.{attr}) BETWEEN {} AND {}", total - d, total + d);
    }
    let _ = write!(s, " {} SUM(P.{objective_attr})", sense.keyword());
    Ok((s, ids))
}

/// A random bounded ILP `max a·x, Σ_i b_ij x_i <= c_j, x >= 0` whose
/// first constraint has only positive coefficients, so every variable is
/// bounded. Coefficients are integers in `[-range, range]`.
pub fn random_raw_ilp(n: usize, k: usize, range: i64, rng: &mut impl Rng) -> RawIlp {
    let range = range.max(1);
    let k = k.max(1);
    let a = (0..n).map(|_| rng.random_range(-range..=range) as f64).collect();
    let b = (0..n)
        .map(|_| {
            (0..k)
                .map(|j| if j == 0 { rng.random_range(1..=range) } else { rng.random_range(-range..=range) } as f64)
                .collect()
        })
        .collect();
    let c = (0..k)
        .map(|j| if j == 0 { rng.random_range(range..=4 * range) } else { rng.random_range(-range..=range) + range } as f64)
        .collect();
    RawIlp { n, k, a, b, c }
}
