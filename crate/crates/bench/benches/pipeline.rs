//! Hot paths end to end: forward map, margin, exact recovery, least-squares
//! recovery, and the deficiency collision solve.

use std::hint::black_box;

use affine_pr::{
    deficiency_collision, jacobian, lsq_recover, margin, measure, tight_recover, Ensemble,
    LsqOptions,
};
use affine_pr_bench::{bench_random, bench_signal, bench_tight, BENCH_SEED};
use criterion::{criterion_group, criterion_main, Criterion};

fn forward(c: &mut Criterion) {
    let e = bench_tight();
    let x = bench_signal(&e, 0);
    c.bench_function("measure tight complex d16 r4", |b| {
        b.iter(|| measure(black_box(&e), black_box(&x)).unwrap())
    });
    c.bench_function("jacobian tight complex d16 r4", |b| {
        b.iter(|| jacobian(black_box(&e), black_box(&x)).unwrap())
    });
    c.bench_function("margin tight complex d16 r4", |b| {
        b.iter(|| margin(black_box(&e), black_box(&x)).unwrap())
    });
}

fn recovery(c: &mut Criterion) {
    let e = bench_tight();
    let x = bench_signal(&e, 1);
    let y = measure(&e, &x).unwrap();
    c.bench_function("tight_recover complex d16 r4", |b| {
        b.iter(|| tight_recover(black_box(&e), black_box(&y)).unwrap())
    });

    let er = bench_random();
    let xr = bench_signal(&er, 2);
    let yr = measure(&er, &xr).unwrap();
    let opts = LsqOptions { restarts: 3, seed: BENCH_SEED, ..LsqOptions::default() };
    c.bench_function("lsq_recover random real d8 m16", |b| {
        b.iter(|| lsq_recover(black_box(&er), black_box(&yr), &opts).unwrap())
    });
}

fn collisions(c: &mut Criterion) {
    // One pair short of the tight count: the deficiency solve must succeed.
    let e = bench_tight();
    let mut pairs = e.pairs.clone();
    pairs.pop();
    let sub = Ensemble::new(e.field, e.d, e.r, pairs);
    c.bench_function("deficiency_collision complex d16 r4", |b| {
        b.iter(|| deficiency_collision(black_box(&sub)).unwrap())
    });
}

criterion_group!(benches, forward, recovery, collisions);
criterion_main!(benches);
