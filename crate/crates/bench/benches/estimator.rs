use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use gthbe::interpolation::build_table;
use gthbe::lambda::{aleph_sweep, inverse_square_sum, lambda_loc_per_nucleus, lambda_nonloc_integral};
use gthbe::nested_boxes::{inverse_square_weights, optimize_deltas, prep_weights_from_stats};
use gthbe::{block_encoding_total, data, AlephConfig, BoxCount, BoxScheme, InterpSpec, MillerGrid, Order};
use gthbe_bench::{parts, system};

fn lattice_sums(c: &mut Criterion) {
    let spec = system("LNO-C2m", [6, 6, 6]);
    let (geom, grid, species) = parts(&spec);
    let mut g = c.benchmark_group("lattice_sums");
    g.sample_size(10);
    g.bench_function("inverse_square_sum/LNO-C2m/n6", |b| b.iter(|| inverse_square_sum(black_box(&geom), &grid)));
    g.bench_function("lambda_loc/LNO-C2m/n6", |b| b.iter(|| lambda_loc_per_nucleus(black_box(&species), &geom, &grid)));
    g.finish();
}

fn nested_boxes(c: &mut Criterion) {
    let spec = system("diamond", [7, 7, 7]);
    let (geom, grid, _) = parts(&spec);
    let weights = inverse_square_weights(&geom, &grid);
    let scheme = BoxScheme::new(grid, [0, 0, 0], false).unwrap();
    let mut g = c.benchmark_group("nested_boxes");
    g.sample_size(10);
    g.bench_function("success_probability/diamond/n7", |b| {
        b.iter(|| {
            let stats = scheme.shell_stats(black_box(&weights));
            prep_weights_from_stats(&scheme, &stats, BoxCount::Distinct).unwrap().success_probability
        })
    });
    let small = MillerGrid::cubic(5).unwrap();
    g.bench_function("optimize_deltas/diamond/n5", |b| b.iter(|| optimize_deltas(black_box(&small), &geom, 2).unwrap()));
    g.finish();
}

fn nonlocal(c: &mut Criterion) {
    let mut g = c.benchmark_group("nonlocal");
    g.sample_size(10);
    let ni = data::species("Ni").unwrap();
    g.bench_function("integral/Ni", |b| b.iter(|| lambda_nonloc_integral(black_box(ni)).unwrap()));
    let spec = system("diamond", [4, 4, 4]);
    let (geom, grid, species) = parts(&spec);
    g.bench_function("aleph_sweep/diamond/n4", |b| {
        b.iter(|| aleph_sweep(black_box(&species), &geom, &grid, spec.deltas, AlephConfig::default()).unwrap())
    });
    g.finish();
}

fn costs(c: &mut Criterion) {
    let spec = system("Pt-2x2", [5, 5, 7]);
    c.bench_function("block_encoding_total/Pt-2x2", |b| b.iter(|| block_encoding_total(black_box(&spec)).unwrap().total));
    let table = build_table(InterpSpec { order: Order::Quadratic, panels: 128 }).unwrap();
    c.bench_function("interpolation/evaluate", |b| b.iter(|| table.evaluate(black_box(3.7))));
    c.bench_function("interpolation/build/quadratic128", |b| {
        b.iter(|| build_table(black_box(InterpSpec { order: Order::Quadratic, panels: 128 })).unwrap())
    });
}

criterion_group!(benches, lattice_sums, nested_boxes, nonlocal, costs);
criterion_main!(benches);
