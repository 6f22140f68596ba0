use criterion::{criterion_group, criterion_main, Criterion};
use skconverse::bounds::cit_bound_best;
use skconverse::hyptest::beta_raw;
use skconverse::protosim::{check_ot_reduction, fuzz, ideal_ot_protocol, FuzzConfig, OtVariant};
use skconverse::{beta_epsilon_iid, JointDist, Var};
use std::hint::black_box;

fn skewed(n: usize, shift: f64) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|i| 1.0 + ((i as f64 + shift) * 0.618).fract()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

fn hypothesis_testing(c: &mut Criterion) {
    let (p, q) = (skewed(4096, 0.0), skewed(4096, 0.3));
    c.bench_function("beta_raw/4096", |b| b.iter(|| beta_raw(black_box(&p), black_box(&q), 0.1).unwrap()));
    let bp = JointDist::from_probs("X", vec![0.7, 0.3]).unwrap();
    let bq = JointDist::from_probs("X", vec![0.5, 0.5]).unwrap();
    c.bench_function("beta_iid/ber/1e4", |b| b.iter(|| beta_epsilon_iid(&bp, &bq, black_box(10_000), 0.1).unwrap()));
}

fn bounds(c: &mut Criterion) {
    let vars: Vec<Var> = (1..=4).map(|i| Var::range(format!("X{i}"), 3).unwrap()).collect();
    let j = JointDist::new(vars, skewed(81, 0.1)).unwrap();
    c.bench_function("cit_bound_best/4x3", |b| b.iter(|| cit_bound_best(black_box(&j), &[], 0.1, 0.05).unwrap()));
}

fn protocols(c: &mut Criterion) {
    let (j, ot) = ideal_ot_protocol(2).unwrap();
    c.bench_function("ot_reduction/l2/variant2", |b| b.iter(|| check_ot_reduction(&j, &ot, OtVariant::Two).unwrap()));
    let cfg = FuzzConfig { count: 50, independence_count: 10, ..FuzzConfig::default() };
    let mut g = c.benchmark_group("fuzz");
    g.sample_size(10);
    g.bench_function("50", |b| b.iter(|| fuzz(black_box(&cfg)).unwrap()));
    g.finish();
}

criterion_group!(benches, hypothesis_testing, bounds, protocols);
criterion_main!(benches);
