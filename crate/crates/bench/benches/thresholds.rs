use criterion::{criterion_group, criterion_main, Criterion};
use hypermatch_core::lattice::IntegerLattice;
use hypermatch_core::thresholds::{finite_min_degree, g_optimize};
use std::hint::black_box;

fn thresholds(c: &mut Criterion) {
    let mut group = c.benchmark_group("g_optimize");
    group.sample_size(10);
    for (k, d, ell) in [(6, 3, 1), (10, 2, 3)] {
        group.bench_function(format!("g({k},{d},{ell})"), |b| b.iter(|| g_optimize(black_box(k), d, ell)));
    }
    group.finish();
    c.bench_function("finite_min_degree n=402 k=10 d=5", |b| {
        b.iter(|| finite_min_degree(black_box(402), 10, 5, 2, 1, 135))
    });
    let gens = vec![vec![1, 1, 1], vec![0, 0, 3], vec![2, 1, 0], vec![0, 3, 0]];
    c.bench_function("lattice basis r=3", |b| b.iter(|| IntegerLattice::new(3, black_box(&gens))));
}

criterion_group!(benches, thresholds);
criterion_main!(benches);
