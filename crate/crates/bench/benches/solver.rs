use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use packq::solver::lp_relax;
use packq::{solve, SolverConfig};
use packq_bench::fixture;

fn solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("solver");
    group.sample_size(10);
    for rows in [500, 2_000] {
        let f = fixture(rows);
        // template 3: one covering constraint, minimize the count
        let model = f.model(2);
        group.bench_with_input(BenchmarkId::new("lp_relaxation", rows), &model, |b, m| {
            b.iter(|| lp_relax(black_box(m)).expect("bounded model"))
        });
        group.bench_with_input(BenchmarkId::new("branch_and_bound", rows), &model, |b, m| {
            b.iter(|| solve(black_box(m), &SolverConfig::default()).expect("bounded model"))
        });
    }
    group.finish();
}

criterion_group!(benches, solver);
criterion_main!(benches);
