use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use mfnet_bench::er_graph;
use mfnet_core::discrepancy::{brute_force_discrepancies, BruteForceRequest};
use std::hint::black_box;

fn bench_sweeps(c: &mut Criterion) {
    let mut group = c.benchmark_group("brute_force_discrepancies");
    for n in [12usize, 16, 20] {
        let g = er_graph(n, 4.0, 7);
        group.bench_function(format!("all_n{n}"), |b| {
            b.iter_batched(
                || g.clone(),
                |g| black_box(brute_force_discrepancies(&g, BruteForceRequest::all(), 24).unwrap()),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, bench_sweeps);
criterion_main!(benches);
