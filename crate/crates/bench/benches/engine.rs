use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use iwasawa_bench::{theta, twisted};
use iwasawa_core::bernoulli::{generalized_bernoulli, BernoulliCache};
use iwasawa_core::heuristics::{tot_thm_sum, PrimeSieve};
use iwasawa_core::lambda::{lambda_method_one, lambda_method_two, LambdaParams};
use iwasawa_core::regularity::is_chi_regular;
use iwasawa_core::rmt::{exact_distribution, montecarlo, rho};

fn bernoulli(c: &mut Criterion) {
    let mut g = c.benchmark_group("bernoulli");
    for label in ["5.2", "163.81"] {
        let th = theta(label);
        g.bench_with_input(BenchmarkId::new("exact_b20", label), &th, |b, th| b.iter(|| generalized_bernoulli(20, black_box(th))));
    }
    g.finish();
}

fn lambda(c: &mut Criterion) {
    let params = LambdaParams::default();
    let mut g = c.benchmark_group("lambda");
    g.sample_size(10);
    for (name, chi) in twisted() {
        g.bench_with_input(BenchmarkId::new("interpolation", &name), &chi, |b, chi| {
            b.iter(|| lambda_method_one(chi, &params, &BernoulliCache::disabled()).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("series", &name), &chi, |b, chi| b.iter(|| lambda_method_two(chi, &params).unwrap()));
    }
    g.finish();
}

fn regularity(c: &mut Criterion) {
    let th = theta("7.2");
    let mut g = c.benchmark_group("regularity");
    for p in [101u64, 401] {
        g.bench_with_input(BenchmarkId::new("cubic", p), &p, |b, &p| b.iter(|| is_chi_regular(&th, p).unwrap()));
    }
    g.finish();
}

fn random_matrices(c: &mut Criterion) {
    let mut g = c.benchmark_group("rmt");
    g.bench_function("rho_3_0", |b| b.iter(|| rho(black_box(3), 0)));
    g.bench_function("exact_8_3", |b| b.iter(|| exact_distribution(black_box(8), 3)));
    g.sample_size(10);
    g.bench_function("montecarlo_8_3_10k", |b| b.iter(|| montecarlo(8, 3, 10_000, 1).unwrap()));
    g.finish();
}

fn primes(c: &mut Criterion) {
    let mut g = c.benchmark_group("primes");
    g.sample_size(10);
    g.bench_function("sieve_1e6", |b| b.iter(|| PrimeSieve::new(black_box(1_000_000))));
    let sieve = PrimeSieve::new(100_000);
    g.bench_function("tot_thm_1e5", |b| b.iter(|| tot_thm_sum(&sieve, 100_000, 3)));
    g.finish();
}

criterion_group!(benches, bernoulli, lambda, regularity, random_matrices, primes);
criterion_main!(benches);
