use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};

use permuton::analytics::star;
use permuton::hecke::{demazure_product, height_grid, random_permutation};
use permuton::pipedream::CompletedShape;
use permuton::rng;
use permuton::shapes::shape_from_paths;
use permuton::{GeomParam, LatticePath, TasepState};

fn staircase(n: usize) -> CompletedShape {
    CompletedShape::new(&shape_from_paths(&LatticePath::staircase_sw(n), &LatticePath::staircase_ne(n)).unwrap())
}

fn fold(c: &mut Criterion) {
    let mut g = c.benchmark_group("demazure_product");
    for n in [100, 1000, 10_000] {
        let mut r = rng::seeded(1);
        let (u, v) = (random_permutation(n, &mut r), random_permutation(n, &mut r));
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| demazure_product(black_box(&u), black_box(&v))));
    }
    g.finish();
}

fn star_product(c: &mut Criterion) {
    let mut g = c.benchmark_group("star");
    g.sample_size(10);
    for n in [50, 200] {
        let mut r = rng::seeded(2);
        let a = height_grid(&random_permutation(n, &mut r));
        let b = height_grid(&random_permutation(n, &mut r));
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |bch, _| bch.iter(|| star(black_box(&a), black_box(&b))));
    }
    g.finish();
}

fn tasep_step(c: &mut Criterion) {
    let p = GeomParam::new(0.5).unwrap();
    let mut g = c.benchmark_group("tasep_step");
    for k in [100, 10_000] {
        g.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, &k| {
            let mut r = rng::seeded(3);
            b.iter_batched_ref(|| TasepState::step_initial(k), |s| s.step(p, &mut r, None), BatchSize::SmallInput)
        });
    }
    g.finish();
}

fn pipedream_sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("staircase_sample");
    g.sample_size(10);
    for n in [100, 500] {
        let shape = staircase(n);
        let mut r = rng::seeded(4);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| shape.demazure_sample(0.5, &mut r)));
    }
    g.finish();
}

criterion_group!(kernels, fold, star_product, tasep_step, pipedream_sampling);
criterion_main!(kernels);
