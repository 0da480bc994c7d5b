use avgop_bench::{ball_box_composition, test_matrix};
use avgop_core::{estimate_modulus, exact_modulus, matrix_modulus, Operator};
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn matrix(c: &mut Criterion) {
    let mut g = c.benchmark_group("matrix_modulus");
    for n in [2, 10, 50] {
        let m = test_matrix(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| b.iter(|| matrix_modulus(black_box(m)).unwrap()));
    }
    g.finish();
}

fn exact(c: &mut Criterion) {
    let op = Operator::relaxation(0.5, Operator::linear(test_matrix(20)).unwrap()).unwrap();
    c.bench_function("exact_modulus/relaxed_linear_20", |b| b.iter(|| exact_modulus(black_box(&op))));
}

fn sampled(c: &mut Criterion) {
    let mut g = c.benchmark_group("estimate_modulus");
    g.sample_size(10);
    for n in [2, 10] {
        let op = ball_box_composition(n);
        g.bench_with_input(BenchmarkId::new("ball_box_1000_pairs", n), &op, |b, op| {
            b.iter(|| estimate_modulus(black_box(op), 1000, 0, 0).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, matrix, exact, sampled);
criterion_main!(benches);
