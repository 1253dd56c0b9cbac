use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nullkit::cone::NullCone;
use nullkit::fixtures;
use nullkit::grw::Orientation;
use nullkit::nullhyp::{box_grid, DEFAULT_UMBILIC_TOL};
use nullkit::par;
use nullkit::twist::obstruction_scan;
use std::sync::Arc;

fn umbilicity(c: &mut Criterion) {
    let sp = Arc::new(fixtures::de_sitter(5));
    let l = NullCone::new(sp, 0.1, vec![1.0, 1.2, 1.1, 0.3], Orientation::Future).unwrap().as_graph().unwrap();
    let grid = box_grid(&[1.3, 1.3, 1.2, 0.5], &[1.6, 1.6, 1.5, 0.8], 4);
    let mut g = c.benchmark_group("umbilicity_test_256");
    g.sample_size(20);
    for (name, seq) in [("sequential", true), ("parallel", false)] {
        g.bench_with_input(BenchmarkId::from_parameter(name), &seq, |b, &seq| {
            par::force_sequential(seq);
            b.iter(|| l.umbilicity_test(&grid, DEFAULT_UMBILIC_TOL, 0).unwrap());
        });
    }
    g.finish();
    par::force_sequential(false);
}

fn obstruction(c: &mut Criterion) {
    let f = fixtures::sphere_product_static().fibre;
    let mut g = c.benchmark_group("obstruction_scan_200");
    g.sample_size(20);
    for (name, seq) in [("sequential", true), ("parallel", false)] {
        g.bench_with_input(BenchmarkId::from_parameter(name), &seq, |b, &seq| {
            par::force_sequential(seq);
            b.iter(|| obstruction_scan(&f, &[1.0, 0.5, 1.2, -0.4], 200, 16, 11).unwrap());
        });
    }
    g.finish();
    par::force_sequential(false);
}

criterion_group!(benches, umbilicity, obstruction);
criterion_main!(benches);
