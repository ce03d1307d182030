use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use thermoscale::cell::{solve_first_order, solve_sample, CellOptions, TemperatureGrid};
use thermoscale::fem::{pcg, BandCholesky, SolverOptions};
use thermoscale::microgen::{GridLayout, TriMesh};
use thermoscale_bench::{circle_cell, example_laws, poisson_system};

fn linear_solvers(c: &mut Criterion) {
    let mut group = c.benchmark_group("poisson");
    for n in [32usize, 64] {
        let sys = poisson_system(&TriMesh::structured(GridLayout::unit_square(n)));
        group.bench_with_input(BenchmarkId::new("band_cholesky", n), &sys, |b, sys| {
            b.iter(|| BandCholesky::factor(&sys.matrix).expect("factor").solve(black_box(&sys.rhs)))
        });
        group.bench_with_input(BenchmarkId::new("pcg", n), &sys, |b, sys| {
            b.iter(|| pcg(&sys.matrix, black_box(&sys.rhs), None, 1e-10, 10_000).expect("pcg"))
        });
    }
    group.finish();
}

fn cell_problems(c: &mut Criterion) {
    let laws = example_laws();
    let mesh = circle_cell(32);
    c.bench_function("cell/first_order_n32", |b| {
        b.iter(|| solve_first_order(&mesh, &laws, black_box(500.0), &SolverOptions::default()).expect("solve"))
    });
    let grid = TemperatureGrid::uniform(273.15, 873.15, 2).expect("grid");
    let mut group = c.benchmark_group("cell");
    group.sample_size(10);
    group.bench_function("second_order_sample_n32_2T", |b| {
        b.iter(|| solve_sample(0, mesh.clone(), &laws, &grid, &CellOptions::default()).expect("solve"))
    });
    group.finish();
}

criterion_group!(benches, linear_solvers, cell_problems);
criterion_main!(benches);
