use avgop_bench::polyhedron;
use avgop_core::{catalog, orbit, Vector};
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

fn douglas_rachford(c: &mut Criterion) {
    let op = catalog::dr_line_slab();
    let x0 = Vector::from_vec(vec![4.0, 10.0]);
    c.bench_function("orbit/dr_line_slab", |b| b.iter(|| orbit(black_box(&op), &x0, 1e-12, 1000).unwrap()));
}

fn dykstra(c: &mut Criterion) {
    let set = polyhedron(10, 8);
    let x = Vector::from_element(10, 3.0);
    c.bench_function("project/polyhedron_10d_8_halfspaces", |b| b.iter(|| set.project(black_box(&x)).unwrap()));
}

criterion_group!(benches, douglas_rachford, dykstra);
criterion_main!(benches);
