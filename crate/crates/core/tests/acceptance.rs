//! Acceptance suite. Runs every criterion at its stated size and tolerance,
//! prints one PASS/FAIL line per criterion and exits non-zero if any fails.

mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use common::{ast_feasible, enumerate_optimum, random_query, Data};
use packq::bench::median;
use packq::eval::{approximation_ratio, eval_direct, eval_sketchrefine, EvalConfig, EvalReport, EvalStatus, Package};
use packq::ilp::{ilp_to_paql, RawIlp};
use packq::paql::Sense;
use packq::partition::{partition, partition_for_epsilon, PartitionParams, Partitioning};
use packq::solver::BranchAndBound;
use packq::workload::{column_name, generate_relation, planted_query, template_workload, ColumnDist};
use packq::{feasible, parse, translate, validate, CheckedQuery, Relation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

/// SketchRefine packages checked against the query text, across the suite.
#[derive(Default)]
struct FeasibilityLedger {
    checked: usize,
    violations: Vec<String>,
}

impl FeasibilityLedger {
    fn record(&mut self, what: &str, q: &CheckedQuery, rel: &Relation, report: &EvalReport) {
        if let Some(pkg) = &report.package {
            self.checked += 1;
            if !ast_feasible(&q.query, rel, pkg) {
                self.violations.push(what.to_string());
            }
        }
    }
}

fn checked(text: &str, rel: &Relation) -> CheckedQuery {
    validate(&parse(text).expect("query parses"), rel.schema()).expect("query validates")
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-6 * b.abs().max(1.0)
}

fn dense(pkg: &Package, n: usize) -> Vec<u64> {
    let mut x = vec![0; n];
    for (id, m) in pkg.iter() {
        x[id] = m;
    }
    x
}

fn oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let cfg = EvalConfig::default();
    let (mut pairs, mut feasible_pairs, mut mismatches) = (0, 0, Vec::new());
    for seed in 0..500u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let repeat = rng.random_range(0..=2u64);
        let n = rng.random_range(1..=[12, 10, 8][repeat as usize]);
        let data = Data::random(&mut rng, n, 3, -5.0, 10.0, 0.5);
        let q = random_query(&mut rng, &data, Some(repeat));
        let rel = data.relation();
        let cq = checked(&q.text(), &rel);
        let expected = enumerate_optimum(&data, &q);
        let got = eval_direct(&cq, &rel, &cfg).expect("direct evaluation");
        pairs += 1;
        let ok = match (expected, got.status) {
            (None, EvalStatus::Infeasible) => true,
            (Some(best), EvalStatus::Feasible) => {
                feasible_pairs += 1;
                let x = dense(got.package.as_ref().unwrap(), n);
                close(got.objective().unwrap(), best) && q.satisfied(&data, &x)
            }
            _ => false,
        };
        if !ok {
            mismatches.push(format!("seed {seed}: {:?} vs {expected:?} for {}", got.status, q.text()));
        }
    }
    let elapsed = start.elapsed();
    for m in mismatches.iter().take(3) {
        eprintln!("  {m}");
    }
    Verdict {
        pass: mismatches.is_empty() && pairs >= 500 && elapsed <= Duration::from_secs(120),
        detail: format!(
            "{pairs} pairs ({feasible_pairs} feasible), {} mismatches, {:.1}s",
            mismatches.len(),
            elapsed.as_secs_f64()
        ),
    }
}

fn translation_soundness() -> Verdict {
    let (mut vectors, mut accepted, mut discrepancies, mut min_per_instance) = (0usize, 0usize, 0usize, usize::MAX);
    for seed in 0..30u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let n = rng.random_range(3..=10);
        let repeat = [None, Some(0), Some(1), Some(2)][rng.random_range(0..4)];
        // quarter steps keep every aggregate exact in floating point
        let data = Data::random(&mut rng, n, 3, -5.0, 10.0, 0.25);
        let mut q = random_query(&mut rng, &data, repeat);
        if q.preds.is_empty() {
            q = random_query(&mut rng, &data, repeat);
        }
        let rel = data.relation();
        let model = translate(&checked(&q.text(), &rel), &rel);
        let mut count = 0;
        while count < 1000 {
            let y: Vec<u64> = model
                .variables
                .iter()
                .map(|_| if rng.random_bool(0.35) { rng.random_range(1..=4) } else { 0 })
                .collect();
            let mut x = vec![0; n];
            for (v, &m) in model.variables.iter().zip(&y) {
                x[v.tuple_id] = m;
            }
            let by_model = feasible(&model, &y).expect("length matches");
            let by_aggregates = q.satisfied(&data, &x);
            discrepancies += usize::from(by_model != by_aggregates);
            accepted += usize::from(by_model);
            count += 1;
        }
        vectors += count;
        min_per_instance = min_per_instance.min(count);
    }
    Verdict {
        pass: discrepancies == 0 && min_per_instance >= 1000,
        detail: format!("{vectors} vectors over 30 instances ({accepted} feasible), {discrepancies} discrepancies"),
    }
}

/// Depth-first enumeration of `max a·x, Bx <= c, x >= 0` integer; the
/// first column of `B` is positive, which bounds the search.
fn raw_optimum(ilp: &RawIlp) -> Option<f64> {
    fn go(ilp: &RawIlp, i: usize, x: &mut Vec<u64>, best: &mut Option<f64>) {
        if i == ilp.n {
            let ok = (0..ilp.k).all(|j| {
                let lhs: f64 = (0..ilp.n).map(|v| ilp.b[v][j] * x[v] as f64).sum();
                lhs <= ilp.c[j] + 1e-9
            });
            if ok {
                let v: f64 = (0..ilp.n).map(|v| ilp.a[v] * x[v] as f64).sum();
                if best.is_none_or(|b| v > b) {
                    *best = Some(v);
                }
            }
            return;
        }
        let used: f64 = (0..i).map(|v| ilp.b[v][0] * x[v] as f64).sum();
        let room = ((ilp.c[0] - used) / ilp.b[i][0]).floor().max(0.0) as u64;
        for m in 0..=room {
            x[i] = m;
            go(ilp, i + 1, x, best);
        }
        x[i] = 0;
    }
    let mut best = None;
    go(ilp, 0, &mut vec![0; ilp.n], &mut best);
    best
}

fn round_trip() -> Verdict {
    let cfg = EvalConfig::default();
    let (mut instances, mut infeasible, mut mismatches) = (0, 0, Vec::new());
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
        let (n, k) = (rng.random_range(1..=10usize), rng.random_range(1..=4usize));
        let b = (0..n)
            .map(|_| {
                (0..k)
                    .map(|j| if j == 0 { rng.random_range(1..=5) } else { rng.random_range(-5..=5) } as f64)
                    .collect()
            })
            .collect();
        let c = (0..k)
            .map(|j| if j == 0 { rng.random_range(0..=12) } else { rng.random_range(-5..=5) } as f64)
            .collect();
        let a = (0..n).map(|_| rng.random_range(-5..=5) as f64).collect();
        let ilp = RawIlp { n, k, a, b, c };
        let expected = raw_optimum(&ilp);
        let (rel, pq) = ilp_to_paql(&ilp).expect("well-formed instance");
        let q = validate(&pq, rel.schema()).expect("generated query validates");
        let got = eval_direct(&q, &rel, &cfg).expect("direct evaluation");
        instances += 1;
        infeasible += usize::from(expected.is_none());
        let ok = match (expected, got.objective()) {
            (None, None) => got.status == EvalStatus::Infeasible,
            (Some(e), Some(g)) => close(g, e),
            _ => false,
        };
        if !ok {
            mismatches.push(format!("seed {seed}: {:?} vs {expected:?}", got.objective()));
        }
    }
    for m in mismatches.iter().take(3) {
        eprintln!("  {m}");
    }
    Verdict {
        pass: mismatches.is_empty() && instances >= 200,
        detail: format!("{instances} ILPs ({infeasible} infeasible), {} mismatches", mismatches.len()),
    }
}

/// A feasible-looking query over positive data: COUNT window, SUM window,
/// SUM objective.
fn positive_instance(rng: &mut ChaCha8Rng, sense: Sense) -> (Relation, CheckedQuery) {
    let n = rng.random_range(30..=150);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..3).map(|_| (rng.random_range(1.0..100.0f64) * 10.0).round() / 10.0).collect())
        .collect();
    let rel = Relation::from_numeric_rows("R", &["a0", "a1", "a2"], &rows).expect("numeric rows");
    let size = rng.random_range(2..=5u64);
    let mean = rows.iter().map(|r| r[1]).sum::<f64>() / n as f64;
    let lo = (size as f64 * mean * rng.random_range(0.7..1.0)).round();
    let hi = lo + (size as f64 * mean * rng.random_range(0.1..0.5)).round();
    let repeat = rng.random_range(0..=1);
    let text = format!(
        "SELECT PACKAGE(R) AS P FROM R R REPEAT {repeat} SUCH THAT COUNT(P.*) BETWEEN 1 AND {} \
         AND SUM(P.a1) BETWEEN {lo} AND {hi} {} SUM(P.a0)",
        size + 2,
        sense.keyword()
    );
    let q = checked(&text, &rel);
    (rel, q)
}

fn approximation_bound(ledger: &mut FeasibilityLedger) -> Verdict {
    let attrs: Vec<String> = vec!["a0".into(), "a1".into()];
    let mut violations = Vec::new();
    let mut compared = [0usize; 2];
    let mut exact_cases = (0usize, 0usize);
    let mut sr_missing = 0;
    let mut seed = 3000u64;
    let sr_cfg = |seed| EvalConfig {
        recursion_threshold: Some(usize::MAX),
        subproblem_node_limit: None,
        seed,
        ..EvalConfig::default()
    };
    for (side, sense) in [Sense::Maximize, Sense::Minimize].into_iter().enumerate() {
        while compared[side] < 100 {
            seed += 1;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (rel, q) = positive_instance(&mut rng, sense);
            let direct = eval_direct(&q, &rel, &EvalConfig::default()).expect("direct evaluation");
            let Some(opt) = direct.objective() else { continue };
            let eps = [0.05, 0.1, 0.25][rng.random_range(0..3)];
            let tau = rng.random_range(rel.len() / 10..=rel.len() / 2).max(1);
            let ids: Vec<usize> = (0..rel.len()).collect();
            let p = partition_for_epsilon(&rel, &ids, &attrs, tau, eps, sense).expect("partitioning").partitioning;
            let sr = eval_sketchrefine(&q, &rel, &p, &sr_cfg(seed)).expect("sketch-refine evaluation");
            ledger.record("approximation bound", &q, &rel, &sr);
            let Some(got) = sr.objective() else {
                sr_missing += 1;
                continue;
            };
            compared[side] += 1;
            let factor = match sense {
                Sense::Maximize => (1.0 - eps).powi(6),
                Sense::Minimize => (1.0 + eps).powi(6),
            };
            let ok = match sense {
                Sense::Maximize => got >= factor * opt - 1e-9 * opt.abs().max(1.0),
                Sense::Minimize => got <= factor * opt + 1e-9 * opt.abs().max(1.0),
            };
            if !ok {
                violations.push(format!("seed {seed} eps {eps}: {got} vs optimum {opt}"));
            }
        }
    }
    let mut exact_bad = Vec::new();
    while exact_cases.0 < 40 {
        seed += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sense = if rng.random_bool(0.5) { Sense::Maximize } else { Sense::Minimize };
        let (rel, q) = positive_instance(&mut rng, sense);
        let direct = eval_direct(&q, &rel, &EvalConfig::default()).expect("direct evaluation");
        if direct.objective().is_none() {
            continue;
        }
        exact_cases.0 += 1;
        let ids: Vec<usize> = (0..rel.len()).collect();
        let p = partition_for_epsilon(&rel, &ids, &attrs, rel.len(), 0.0, sense).expect("partitioning").partitioning;
        let sr = eval_sketchrefine(&q, &rel, &p, &sr_cfg(seed)).expect("sketch-refine evaluation");
        ledger.record("approximation bound, eps 0", &q, &rel, &sr);
        match approximation_ratio(&direct, &sr, sense) {
            Ok(r) if (r - 1.0).abs() <= 1e-6 => exact_cases.1 += 1,
            other => exact_bad.push(format!("seed {seed}: {other:?}")),
        }
    }
    for m in violations.iter().chain(&exact_bad).take(3) {
        eprintln!("  {m}");
    }
    Verdict {
        pass: violations.is_empty() && exact_bad.is_empty(),
        detail: format!(
            "{} max + {} min comparisons, {} violations ({sr_missing} without a package); eps 0: {}/{} ratio 1",
            compared[0],
            compared[1],
            violations.len(),
            exact_cases.1,
            exact_cases.0
        ),
    }
}

/// Extra randomized sketch-refine runs over the full query grammar, feeding
/// the suite-wide feasibility ledger.
fn feasibility_sweep(ledger: &mut FeasibilityLedger) {
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(4000 + seed);
        let n = rng.random_range(5..=80);
        let data = Data::random(&mut rng, n, 3, -5.0, 20.0, 0.1);
        let repeat = [None, Some(0), Some(1), Some(2)][rng.random_range(0..4)];
        let mut q = random_query(&mut rng, &data, repeat);
        if repeat.is_none() {
            q.preds.push(common::Pred {
                lhs: common::Agg::Count,
                rhs: common::Rhs::Cmp(packq::paql::GlobalOp::Le, 6.0),
            });
        }
        let rel = data.relation();
        let cq = checked(&q.text(), &rel);
        let tau = rng.random_range(1..=n);
        let omega = if rng.random_bool(0.5) { f64::INFINITY } else { rng.random_range(0.0..10.0) };
        let p = partition(
            &rel,
            &PartitionParams {
                attrs: vec!["a0".into(), "a1".into(), "a2".into()],
                tau,
                omega,
            },
        )
        .expect("partitioning");
        let cfg = EvalConfig {
            hybrid_sketch: rng.random_bool(0.5),
            seed,
            time_limit: Duration::from_secs(30),
            ..EvalConfig::default()
        };
        let sr = eval_sketchrefine(&cq, &rel, &p, &cfg).expect("sketch-refine evaluation");
        ledger.record("random grammar", &cq, &rel, &sr);
    }
}

fn feasibility_guarantee(ledger: &FeasibilityLedger) -> Verdict {
    for v in ledger.violations.iter().take(3) {
        eprintln!("  violation in {v}");
    }
    Verdict {
        pass: ledger.violations.is_empty() && ledger.checked > 0,
        detail: format!("{} packages checked, {} violations", ledger.checked, ledger.violations.len()),
    }
}

fn partitioner_contract() -> Verdict {
    let start = Instant::now();
    let mut problems: Vec<String> = Vec::new();
    let mut groups = 0usize;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
        let n = if seed < 3 { 100_000 } else { 10f64.powf(rng.random_range(1.0..4.7f64)) as usize };
        let k = rng.random_range(1..=4);
        let style = rng.random_range(0..3);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..k)
                    .map(|_| match style {
                        0 => rng.random_range(-50.0..50.0),
                        // bell-shaped
                        1 => (0..4).map(|_| rng.random_range(0.0..25.0)).sum::<f64>(),
                        // few distinct values, so some groups cannot split
                        _ => rng.random_range(0..4) as f64,
                    })
                    .collect()
            })
            .collect();
        let names: Vec<String> = (0..k).map(column_name).collect();
        let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let rel = Relation::from_numeric_rows("R", &name_refs, &rows).expect("numeric rows");
        let tau = (10f64.powf(rng.random_range(0.0..(n as f64).log10())) as usize).max(1);
        let omega = if rng.random_bool(0.5) { f64::INFINITY } else { rng.random_range(0.0..30.0) };
        let p = partition(&rel, &PartitionParams { attrs: names, tau, omega }).expect("partitioning");
        groups += p.groups.len();
        if let Err(e) = check_partitioning(&rows, &p, tau, omega) {
            problems.push(format!("seed {seed} (n {n}, k {k}, tau {tau}, omega {omega}): {e}"));
        }
    }
    for p in problems.iter().take(3) {
        eprintln!("  {p}");
    }
    Verdict {
        pass: problems.is_empty(),
        detail: format!(
            "50 datasets, {groups} groups, {} failing, {:.1}s",
            problems.len(),
            start.elapsed().as_secs_f64()
        ),
    }
}

/// Recomputes every group property from the raw rows.
fn check_partitioning(rows: &[Vec<f64>], p: &Partitioning, tau: usize, omega: f64) -> Result<(), String> {
    let mut seen = vec![false; rows.len()];
    for (gi, g) in p.groups.iter().enumerate() {
        if g.members.is_empty() {
            return Err(format!("group {gi} is empty"));
        }
        for &id in &g.members {
            if std::mem::replace(&mut seen[id], true) {
                return Err(format!("tuple {id} in two groups"));
            }
            if p.gid[id] != Some(gi) {
                return Err(format!("gid of tuple {id} is {:?}, expected {gi}", p.gid[id]));
            }
        }
        let k = rows[0].len();
        let mut radius = 0.0f64;
        for c in 0..k {
            let mean = g.members.iter().map(|&id| rows[id][c]).sum::<f64>() / g.members.len() as f64;
            let rep = g.representative[c];
            if (rep - mean).abs() > 1e-9 * mean.abs().max(1e-300) && (rep - mean).abs() > 1e-12 {
                return Err(format!("group {gi} centroid {rep} vs mean {mean}"));
            }
            for &id in &g.members {
                radius = radius.max((rows[id][c] - rep).abs());
            }
        }
        if g.degenerate {
            let first = &rows[g.members[0]];
            if g.members.iter().any(|&id| rows[id] != *first) {
                return Err(format!("group {gi} is flagged degenerate but has distinct members"));
            }
        } else if g.members.len() > tau || radius > omega {
            return Err(format!("group {gi}: size {} radius {radius}", g.members.len()));
        }
    }
    if seen.iter().any(|s| !s) {
        return Err("some tuple is in no group".into());
    }
    Ok(())
}

struct Workload {
    rel: Relation,
    queries: Vec<CheckedQuery>,
    attrs: Vec<String>,
}

fn speed_workload() -> Workload {
    let rel = generate_relation("R", 50_000, &[ColumnDist::Uniform { lo: 0.0, hi: 100.0 }; 4], 1).expect("relation");
    let attrs: Vec<String> = (0..4).map(column_name).collect();
    let queries = template_workload(&rel, &attrs, 10.0, Some(0), 7)
        .expect("workload")
        .iter()
        .map(|t| checked(t, &rel))
        .collect();
    Workload { rel, queries, attrs }
}

fn eval_cfg() -> EvalConfig {
    EvalConfig {
        solver: Arc::new(BranchAndBound),
        time_limit: Duration::from_secs(60),
        ..EvalConfig::default()
    }
}

fn speedup(w: &Workload, ledger: &mut FeasibilityLedger) -> Verdict {
    let start = Instant::now();
    let tau = w.rel.len() / 10;
    let p = partition(
        &w.rel,
        &PartitionParams {
            attrs: w.attrs.clone(),
            tau,
            omega: f64::INFINITY,
        },
    )
    .expect("partitioning");
    let (mut direct_ms, mut sr_ms, mut ratios) = (Vec::new(), Vec::new(), Vec::new());
    for q in &w.queries {
        let d = eval_direct(q, &w.rel, &eval_cfg()).expect("direct evaluation");
        let s = eval_sketchrefine(q, &w.rel, &p, &eval_cfg()).expect("sketch-refine evaluation");
        ledger.record("speedup workload", q, &w.rel, &s);
        direct_ms.push(d.timings.total);
        sr_ms.push(s.timings.total);
        // a missing package counts as an unbounded ratio
        ratios.push(approximation_ratio(&d, &s, q.sense()).unwrap_or(f64::INFINITY));
    }
    let (dm, sm, rm) = (median(&direct_ms).unwrap(), median(&sr_ms).unwrap(), median(&ratios).unwrap());
    let elapsed = start.elapsed();
    eprintln!("  direct ms {direct_ms:.1?}");
    eprintln!("  sketch-refine ms {sr_ms:.1?}");
    eprintln!("  ratios {ratios:.4?}");
    Verdict {
        pass: sm <= 0.5 * dm && rm <= 2.0 && elapsed <= Duration::from_secs(600),
        detail: format!(
            "median direct {dm:.1} ms, median sketch-refine {sm:.1} ms ({:.2}x), median ratio {rm:.4}, {:.1}s",
            sm / dm,
            elapsed.as_secs_f64()
        ),
    }
}

fn tau_sweep(w: &Workload, ledger: &mut FeasibilityLedger) -> Verdict {
    let fractions = [0.0002, 0.001, 0.01, 0.1, 1.0];
    let mut means = Vec::new();
    for f in fractions {
        let tau = ((f * w.rel.len() as f64).round() as usize).max(1);
        let p = partition(
            &w.rel,
            &PartitionParams {
                attrs: w.attrs.clone(),
                tau,
                omega: f64::INFINITY,
            },
        )
        .expect("partitioning");
        let mut times = Vec::new();
        for q in &w.queries {
            let s = eval_sketchrefine(q, &w.rel, &p, &eval_cfg()).expect("sketch-refine evaluation");
            ledger.record("tau sweep", q, &w.rel, &s);
            times.push(s.timings.total);
        }
        means.push(times.iter().sum::<f64>() / times.len() as f64);
    }
    let (first, last) = (means[0], means[means.len() - 1]);
    let dip = means[1..means.len() - 1].iter().any(|&m| m < first && m < last);
    let shown: Vec<String> = fractions.iter().zip(&means).map(|(f, m)| format!("{f}:{m:.1}")).collect();
    Verdict {
        pass: dip,
        detail: format!("mean ms by tau fraction {}", shown.join(" ")),
    }
}

fn false_infeasibility(ledger: &mut FeasibilityLedger) -> Verdict {
    let rel = generate_relation("R", 5_000, &[ColumnDist::Uniform { lo: 0.0, hi: 100.0 }; 3], 3).expect("relation");
    let attrs: Vec<String> = (0..3).map(column_name).collect();
    let p = partition(
        &rel,
        &PartitionParams {
            attrs: attrs.clone(),
            tau: 500,
            omega: f64::INFINITY,
        },
    )
    .expect("partitioning");
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut infeasible, mut other) = (0, 0);
    for i in 0..100u64 {
        let sense = if rng.random_bool(0.5) { Sense::Maximize } else { Sense::Minimize };
        let size = rng.random_range(3..=10);
        let (text, _) =
            planted_query(&rel, &attrs[..2], &attrs[2], sense, size, 0.05, &mut rng).expect("planted query");
        let q = checked(&text, &rel);
        let cfg = EvalConfig {
            seed: i,
            time_limit: Duration::from_secs(30),
            ..EvalConfig::default()
        };
        let s = eval_sketchrefine(&q, &rel, &p, &cfg).expect("sketch-refine evaluation");
        ledger.record("planted queries", &q, &rel, &s);
        match s.status {
            EvalStatus::Feasible => {}
            EvalStatus::Infeasible => infeasible += 1,
            EvalStatus::TimeLimit => other += 1,
        }
    }
    // time-outs count against the rate as well
    let failed = infeasible + other;
    Verdict {
        pass: failed <= 5,
        detail: format!("{infeasible} infeasible and {other} timed out of 100 planted queries"),
    }
}

fn main() {
    let start = Instant::now();
    let mut ledger = FeasibilityLedger::default();
    let mut results: Vec<(u32, &str, Verdict)> = Vec::new();
    let mut run = |id: u32, name: &'static str, f: &mut dyn FnMut() -> Verdict| {
        let t = Instant::now();
        let v = f();
        eprintln!("[criterion {id} finished in {:.1}s]", t.elapsed().as_secs_f64());
        results.push((id, name, v));
    };
    run(1, "oracle equivalence", &mut oracle_equivalence);
    run(2, "translation soundness", &mut translation_soundness);
    run(3, "ILP round trip", &mut round_trip);
    run(4, "approximation bound", &mut || approximation_bound(&mut ledger));
    run(6, "partitioner contract", &mut partitioner_contract);
    let w = speed_workload();
    run(7, "speedup trend", &mut || speedup(&w, &mut ledger));
    run(8, "tau sweep shape", &mut || tau_sweep(&w, &mut ledger));
    run(9, "false infeasibility", &mut || false_infeasibility(&mut ledger));
    feasibility_sweep(&mut ledger);
    run(5, "feasibility guarantee", &mut || feasibility_guarantee(&ledger));
    results.sort_by_key(|r| r.0);
    for (id, name, v) in &results {
        println!("criterion {id} {name}: {} ({})", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {} of {} criteria passed in {:.1}s",
        results.len() - failed.len(),
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
