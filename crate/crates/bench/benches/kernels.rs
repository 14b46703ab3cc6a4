use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use weaklab_bench::{input, mesh};
use weaklab_core::operators::{hilbert_transform, hl_maximal, HilbertIntegrand};
use weaklab_core::sparse::{build_sparse_family, cz_decompose};
use weaklab_core::weights::{ap_characteristic, ScalarWeight, SearchSpace};

fn maximal(c: &mut Criterion) {
    let mut g = c.benchmark_group("hl_maximal");
    for level in [8, 12, 16] {
        let f = input(level).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(level), &f, |b, f| b.iter(|| hl_maximal(black_box(f)).unwrap()));
    }
    g.finish();
}

fn sparse(c: &mut Criterion) {
    let mut g = c.benchmark_group("sparse");
    let f = input(14).unwrap();
    g.bench_function("stopping_family", |b| b.iter(|| build_sparse_family(black_box(&f), 1, None).unwrap()));
    g.bench_function("cz_decompose", |b| b.iter(|| cz_decompose(black_box(&f), 0.5, 1).unwrap()));
    g.finish();
}

fn characteristic(c: &mut Criterion) {
    let w = ScalarWeight::power(-0.5).unwrap();
    let search = SearchSpace::new(mesh(8).unwrap());
    c.bench_function("ap_characteristic", |b| b.iter(|| ap_characteristic(black_box(&w), 2.0, &search).unwrap()));
}

fn hilbert(c: &mut Criterion) {
    let f = input(10).unwrap();
    let m = f.mesh;
    c.bench_function("hilbert_on_mesh", |b| {
        b.iter(|| hilbert_transform(HilbertIntegrand::from_mesh_function(black_box(&f))).unwrap().on_mesh(&m).unwrap())
    });
}

criterion_group!(benches, maximal, sparse, characteristic, hilbert);
criterion_main!(benches);
