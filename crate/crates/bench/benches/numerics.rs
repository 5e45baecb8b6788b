use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use ndarray::Array1;
use std::hint::black_box;

use fraxol_core::green::{apply, assemble, spectral_radius};
use fraxol_core::model::SystemOperators;
use fraxol_core::solver::picard_solve;
use fraxol_core::{
    build_grid, presets, BallDomain, BallGreenKernel, FracOrder, QuadControl,
};

fn kernel_eval(c: &mut Criterion) {
    let domain = BallDomain::new(2, 1.0).unwrap();
    let kern = BallGreenKernel::new(&domain, FracOrder::new(0.25).unwrap());
    c.bench_function("kernel_value", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for k in 1..=100 {
                let t = k as f64 / 101.0;
                acc += kern
                    .value(black_box(&[0.3, 0.1]), black_box(&[t * 0.9, -0.2 * t]))
                    .unwrap();
            }
            acc
        })
    });
}

fn assembly(c: &mut Criterion) {
    let domain = BallDomain::new(2, 1.0).unwrap();
    let grid = build_grid(&domain, 16).unwrap();
    let s = FracOrder::new(0.5).unwrap();
    c.bench_function("assemble_res16", |b| {
        b.iter(|| assemble(black_box(&grid), &domain, s).unwrap())
    });
}

fn operator_apply(c: &mut Criterion) {
    let domain = BallDomain::new(2, 1.0).unwrap();
    let grid = build_grid(&domain, 32).unwrap();
    let op = assemble(&grid, &domain, FracOrder::new(0.5).unwrap()).unwrap();
    let f = Array1::from_iter((0..op.len()).map(|k| (k as f64 * 0.01).sin()));
    c.bench_function("apply_res32", |b| b.iter(|| apply(&op, black_box(&f)).unwrap()));
}

fn power_iteration(c: &mut Criterion) {
    let domain = BallDomain::new(2, 1.0).unwrap();
    let grid = build_grid(&domain, 16).unwrap();
    let op = assemble(&grid, &domain, FracOrder::new(0.5).unwrap()).unwrap();
    c.bench_function("spectral_radius_res16", |b| {
        b.iter(|| spectral_radius(black_box(&op), 1e-8, 10_000).unwrap())
    });
}

fn picard(c: &mut Criterion) {
    let sys = presets::nonexistence_example(0.1, 1.0, 0.0, 0.0, 12);
    let ops = SystemOperators::build(&sys, &QuadControl::default()).unwrap();
    let corner = {
        let n = ops.grid().len();
        let mut interior = ndarray::Array2::zeros((sys.m, n));
        interior.fill(0.5);
        fraxol_core::State::new(interior, Array1::from_elem(sys.m, 0.5)).unwrap()
    };
    c.bench_function("picard_res12", |b| {
        b.iter_batched(
            || corner.clone(),
            |start| picard_solve(&sys, &ops, start, 0.5, 1e-8, 2000, false).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, kernel_eval, assembly, operator_apply, power_iteration, picard);
criterion_main!(benches);
