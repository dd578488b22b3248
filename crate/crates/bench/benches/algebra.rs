use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use wick_bench::{product_policy, rng, vector};
use wick_core::{pairing, pointwise_product, s_transform, wick_product, Projection};

fn products(c: &mut Criterion) {
    let mut group = c.benchmark_group("products");
    for (k, n_max) in [(6u32, 4u32), (8, 5)] {
        let policy = product_policy(k, n_max);
        let mut r = rng();
        let x = vector(&mut r, &policy, n_max);
        let y = vector(&mut r, &policy, n_max);
        let label = format!("k{k}_n{n_max}");
        group.bench_with_input(BenchmarkId::new("wick", &label), &(&x, &y), |b, (x, y)| {
            b.iter(|| wick_product(black_box(x), black_box(y)).unwrap())
        });
        group.bench_with_input(
            BenchmarkId::new("pointwise", &label),
            &(&x, &y),
            |b, (x, y)| b.iter(|| pointwise_product(black_box(x), black_box(y)).unwrap()),
        );
    }
    group.finish();
}

fn functionals(c: &mut Criterion) {
    let policy = product_policy(6, 4);
    let mut r = rng();
    let x = vector(&mut r, &policy, 4);
    let y = vector(&mut r, &policy, 4);
    let xi = Projection::from_coeffs(vec![0.3, -0.2, 0.5, 0.1, -0.4, 0.25]);
    c.bench_function("pairing_k6_n4", |b| {
        b.iter(|| pairing(black_box(&x), black_box(&y)))
    });
    c.bench_function("s_transform_k6_n4", |b| {
        b.iter(|| s_transform(black_box(&x), black_box(&xi)))
    });
}

criterion_group!(benches, products, functionals);
criterion_main!(benches);
