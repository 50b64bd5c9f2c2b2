//! Benchmark harness: runs queries under both methods across a sweep and
//! aggregates wall times and approximation ratios.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::eval::{approximation_ratio, eval_direct, eval_sketchrefine, EvalConfig, EvalReport, EvalStatus, Method};
use crate::paql::CheckedQuery;
use crate::partition::{partition, partition_for_epsilon, shrink_for_scaling, PartitionParams, Partitioning};
use crate::relation::Relation;

/// Size threshold as a tuple count or as a fraction of the relation size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauSpec {
    Count(usize),
    Fraction(f64),
}

impl TauSpec {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            TauSpec::Count(t) => t.max(1),
            TauSpec::Fraction(f) => ((f * n as f64).round() as usize).max(1),
        }
    }
}

/// Radius limit: fixed (`None` is no limit) or derived from an
/// approximation target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaSpec {
    Fixed(Option<f64>),
    Epsilon(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    /// Keep fractions of the partitioned relation.
    Scale(Vec<f64>),
    /// Size thresholds as fractions of the relation size.
    Tau(Vec<f64>),
    /// Partitioning attribute sets.
    Coverage(Vec<Vec<String>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchPlan {
    pub methods: Vec<Method>,
    pub attrs: Vec<String>,
    pub tau: TauSpec,
    pub omega: OmegaSpec,
    pub sweep: Sweep,
    pub repetitions: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub query: String,
    pub method: Method,
    /// Sweep point label; `*` for Direct rows that do not depend on it.
    pub scale: String,
    pub mean_ms: f64,
    pub median_ms: f64,
    pub mean_ratio: Option<f64>,
    pub median_ratio: Option<f64>,
    pub failures: usize,
    pub runs: usize,
    /// Mean time over the mean time at the point whose attributes equal
    /// the query's (coverage sweeps only).
    pub relative_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuerySummary {
    pub query: String,
    pub mean_ratio: Option<f64>,
    pub median_ratio: Option<f64>,
    pub ratios: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub queries: Vec<QuerySummary>,
    pub errors: Vec<String>,
}

pub fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

pub fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    Some(if s.len() % 2 == 1 { s[m] } else { (s[m - 1] + s[m]) / 2.0 })
}

#[derive(Default)]
struct Samples {
    times: Vec<f64>,
    ratios: Vec<f64>,
    failures: usize,
    runs: usize,
}

impl Samples {
    fn record(&mut self, r: &Result<EvalReport, String>) {
        self.runs += 1;
        match r {
            Ok(r) => {
                self.times.push(r.timings.total);
                if r.status != EvalStatus::Feasible {
                    self.failures += 1;
                }
            }
            Err(_) => self.failures += 1,
        }
    }

    fn row(&self, query: &str, method: Method, scale: String) -> BenchRow {
        BenchRow {
            query: query.to_string(),
            method,
            scale,
            mean_ms: mean(&self.times).unwrap_or(f64::NAN),
            median_ms: median(&self.times).unwrap_or(f64::NAN),
            mean_ratio: mean(&self.ratios),
            median_ratio: median(&self.ratios),
            failures: self.failures,
            runs: self.runs,
            relative_time: None,
        }
    }
}

struct Point {
    label: String,
    attrs: Vec<String>,
    tau: TauSpec,
    scale: f64,
}

fn points(plan: &BenchPlan) -> Vec<Point> {
    let base = |label: String| Point {
        label,
        attrs: plan.attrs.clone(),
        tau: plan.tau,
        scale: 1.0,
    };
    match &plan.sweep {
        Sweep::Scale(fs) => fs
            .iter()
            .map(|&f| Point {
                scale: f,
                ..base(format!("{f}"))
            })
            .collect(),
        Sweep::Tau(fs) => fs
            .iter()
            .map(|&f| Point {
                tau: TauSpec::Fraction(f),
                ..base(format!("{f}"))
            })
            .collect(),
        Sweep::Coverage(sets) => sets
            .iter()
            .map(|s| Point {
                attrs: s.clone(),
                ..base(s.join("+"))
            })
            .collect(),
    }
}

fn build_partitioning(rel: &Relation, q: &CheckedQuery, plan: &BenchPlan, pt: &Point) -> crate::Result<Partitioning> {
    let tau = pt.tau.resolve(rel.len());
    Ok(match plan.omega {
        OmegaSpec::Fixed(omega) => partition(
            rel,
            &PartitionParams {
                attrs: pt.attrs.clone(),
                tau,
                omega: omega.unwrap_or(f64::INFINITY),
            },
        )?,
        OmegaSpec::Epsilon(eps) => {
            let ids: Vec<usize> = (0..rel.len()).collect();
            partition_for_epsilon(rel, &ids, &pt.attrs, tau, eps, q.sense())?.partitioning
        }
    })
}

/// Runs every query at every sweep point `plan.repetitions` times. Run
/// `r` uses evaluation seed `plan.seed + r`. Errors are recorded and
/// counted as failures; the bench continues.
pub fn run_bench(rel: &Relation, queries: &[(String, CheckedQuery)], plan: &BenchPlan, cfg: &EvalConfig) -> BenchReport {
    let mut report = BenchReport::default();
    let want = |m| plan.methods.contains(&m);
    let point_list = points(plan);
    let scale_sweep = matches!(plan.sweep, Sweep::Scale(_));
    for (name, q) in queries {
        let mut all_ratios = Vec::new();
        let mut shared_direct: Vec<Result<EvalReport, String>> = Vec::new();
        let mut shared_samples = Samples::default();
        let run_cfg = |r: usize| EvalConfig {
            seed: plan.seed.wrapping_add(r as u64),
            ..cfg.clone()
        };
        if !scale_sweep && want(Method::Direct) {
            for r in 0..plan.repetitions {
                let d = eval_direct(q, rel, &run_cfg(r)).map_err(|e| e.to_string());
                shared_samples.record(&d);
                if let Err(e) = &d {
                    report.errors.push(format!("{name} direct: {e}"));
                }
                shared_direct.push(d);
            }
            report.rows.push(shared_samples.row(name, Method::Direct, "*".into()));
        }
        let mut sr_rows = Vec::new();
        for pt in &point_list {
            let part = build_partitioning(rel, q, plan, pt).and_then(|p| {
                if scale_sweep {
                    let s = shrink_for_scaling(rel, &p, pt.scale, plan.seed)?;
                    Ok(s.compact(rel))
                } else {
                    Ok((rel.clone(), p))
                }
            });
            let (prel, p) = match part {
                Ok(x) => x,
                Err(e) => {
                    report.errors.push(format!("{name} @ {}: {e}", pt.label));
                    continue;
                }
            };
            let mut direct = Samples::default();
            let mut sr = Samples::default();
            for r in 0..plan.repetitions {
                let d = if scale_sweep && want(Method::Direct) {
                    let d = eval_direct(q, &prel, &run_cfg(r)).map_err(|e| e.to_string());
                    direct.record(&d);
                    if let Err(e) = &d {
                        report.errors.push(format!("{name} direct @ {}: {e}", pt.label));
                    }
                    Some(d)
                } else {
                    shared_direct.get(r).cloned()
                };
                if want(Method::SketchRefine) {
                    let s = eval_sketchrefine(q, &prel, &p, &run_cfg(r)).map_err(|e| e.to_string());
                    sr.record(&s);
                    match (&s, d) {
                        (Err(e), _) => report.errors.push(format!("{name} sketchrefine @ {}: {e}", pt.label)),
                        (Ok(s), Some(Ok(d))) => {
                            if let Ok(ratio) = approximation_ratio(&d, s, q.sense()) {
                                sr.ratios.push(ratio);
                                all_ratios.push(ratio);
                            }
                        }
                        _ => {}
                    }
                }
            }
            if scale_sweep && want(Method::Direct) {
                report.rows.push(direct.row(name, Method::Direct, pt.label.clone()));
            }
            if want(Method::SketchRefine) {
                sr_rows.push((pt.attrs.clone(), sr.row(name, Method::SketchRefine, pt.label.clone())));
            }
        }
        if matches!(plan.sweep, Sweep::Coverage(_)) {
            let query_attrs: Vec<&str> = q
                .numeric_attrs
                .iter()
                .map(|&a| rel.schema().attributes()[a].name.as_str())
                .collect();
            let same = |attrs: &[String]| {
                let mut a: Vec<&str> = attrs.iter().map(String::as_str).collect();
                a.sort_unstable();
                a.dedup();
                let mut b = query_attrs.clone();
                b.sort_unstable();
                a == b
            };
            let reference = sr_rows.iter().find(|(a, _)| same(a)).map(|(_, r)| r.mean_ms);
            for (_, row) in &mut sr_rows {
                row.relative_time = reference.filter(|&t| t > 0.0).map(|t| row.mean_ms / t);
            }
        }
        report.rows.extend(sr_rows.into_iter().map(|(_, r)| r));
        report.queries.push(QuerySummary {
            query: name.clone(),
            mean_ratio: mean(&all_ratios),
            median_ratio: median(&all_ratios),
            ratios: all_ratios.len(),
        });
    }
    report
}

impl BenchReport {
    /// CSV table with columns
    /// `query, method, scale, mean_ms, median_ms, mean_ratio, median_ratio, failures`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["query", "method", "scale", "mean_ms", "median_ms", "mean_ratio", "median_ratio", "failures"])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            out.write_record([
                r.query.clone(),
                r.method.to_string(),
                r.scale.clone(),
                r.mean_ms.to_string(),
                r.median_ms.to_string(),
                opt(r.mean_ratio),
                opt(r.median_ratio),
                r.failures.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Mean SketchRefine time per sweep label, averaged over queries.
    pub fn mean_time_by_point(&self, method: Method) -> BTreeMap<String, f64> {
        let mut acc: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for r in self.rows.iter().filter(|r| r.method == method && r.mean_ms.is_finite()) {
            acc.entry(r.scale.clone()).or_default().push(r.mean_ms);
        }
        acc.into_iter().map(|(k, v)| (k, mean(&v).unwrap_or(f64::NAN))).collect()
    }
}
