use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use orbindex::index_engine::{decompose, evaluate, index_by_cyclic, index_by_elements};
use orbindex::strata::instantiate;
use orbindex::suite::run_criterion;
use orbindex::{Cyclotomic, ModelId, Operator, Representation, Twist};

fn cyclotomic(c: &mut Criterion) {
    let mut g = c.benchmark_group("cyclotomic");
    for n in [12u64, 60, 360] {
        let a: Cyclotomic = (1..6).map(|k| Cyclotomic::root(n, k * 7)).sum();
        let b: Cyclotomic = (1..4).map(|k| Cyclotomic::root(n, -k * 5)).sum();
        g.bench_with_input(BenchmarkId::new("mul", n), &n, |bench, _| bench.iter(|| black_box(&a) * black_box(&b)));
        g.bench_with_input(BenchmarkId::new("inv_one_minus_root", n), &n, |bench, _| {
            let x = Cyclotomic::one() - Cyclotomic::root(n, 1);
            bench.iter(|| black_box(&x).inv().unwrap())
        });
    }
    g.finish();
}

fn index(c: &mut Criterion) {
    let mut g = c.benchmark_group("index");
    let twist = Twist::line(5, 1);
    let rho = Representation::Character(1);
    for n in [3u32, 7, 12] {
        let id = ModelId::Football(n);
        g.bench_with_input(BenchmarkId::new("football_by_elements", n), &n, |bench, _| {
            bench.iter(|| {
                // fresh model, so the cached integrals are rebuilt each time
                let m = instantiate(&id).unwrap();
                index_by_elements(&m, Operator::Dolbeault, &twist, &rho).unwrap()
            })
        });
        g.bench_with_input(BenchmarkId::new("football_by_cyclic", n), &n, |bench, _| {
            bench.iter(|| {
                let m = instantiate(&id).unwrap();
                index_by_cyclic(&m, Operator::Dolbeault, &twist, &rho).unwrap()
            })
        });
    }
    let p6 = ModelId::Wallpaper(orbindex::groups::WallpaperKind::P6);
    g.bench_function("p6_evaluate", |bench| {
        bench.iter(|| {
            let m = instantiate(&p6).unwrap();
            evaluate(&m, Operator::Dolbeault, &Twist::line(0, 1), &rho).unwrap()
        })
    });
    g.bench_function("football6_decompose", |bench| {
        bench.iter(|| {
            let m = instantiate(&ModelId::Football(6)).unwrap();
            decompose(&m, Operator::Dolbeault).unwrap()
        })
    });
    g.finish();
}

fn suite(c: &mut Criterion) {
    let mut g = c.benchmark_group("suite");
    g.sample_size(10);
    for id in [2u8, 8] {
        g.bench_with_input(BenchmarkId::new("criterion", id), &id, |bench, &id| bench.iter(|| run_criterion(id).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, cyclotomic, index, suite);
criterion_main!(benches);
