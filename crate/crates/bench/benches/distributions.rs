use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use runchart_core::scan::{EndingBlockAutomaton, ScanEngine, ScanRoute, DEFAULT_STATE_BUDGET};
use runchart_core::{runs_pmf, scan_tail, RunsQuery, ScanQuery};

fn runs(c: &mut Criterion) {
    let mut group = c.benchmark_group("runs_pmf");
    for &(n, n1) in &[(40usize, 8usize), (100, 50), (400, 200)] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{n}_{n1}")), &(n, n1), |b, &(n, n1)| {
            b.iter(|| runs_pmf(RunsQuery::new(black_box(n), n1).unwrap()).unwrap())
        });
    }
    group.finish();
}

fn scan(c: &mut Criterion) {
    let mut group = c.benchmark_group("scan_tail");
    for &(n, n1, r, s) in &[(40usize, 8usize, 6usize, 5usize), (40, 12, 10, 7), (100, 50, 10, 8)] {
        let q = ScanQuery::new(n, n1, r, s).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(format!("{n}_{n1}_{r}_{s}")), &q, |b, &q| {
            b.iter(|| scan_tail(black_box(q)).unwrap())
        });
    }
    group.finish();
}

fn wide(c: &mut Criterion) {
    let mut group = c.benchmark_group("scan_pmf_route");
    group.sample_size(20);
    for route in [ScanRoute::Automaton, ScanRoute::WideWindow] {
        let engine = ScanEngine::with_route(route);
        group.bench_function(format!("{route:?}_30_12_16"), |b| {
            b.iter(|| engine.pmf(black_box(30), 12, 16).unwrap())
        });
    }
    group.finish();
}

fn automaton(c: &mut Criterion) {
    c.bench_function("automaton_build_20_10", |b| {
        b.iter(|| EndingBlockAutomaton::for_scan(black_box(20), 10, DEFAULT_STATE_BUDGET).unwrap())
    });
}

criterion_group!(benches, runs, scan, wide, automaton);
criterion_main!(benches);
