//! Sequential against parallel execution on the data-parallel kernels.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fpt::asymptotics::homogeneous::sandwich;
use fpt::exec::Exec;
use fpt::parking::enumerate::{enumerate_fnp, ITERATION_BUDGET};
use fpt::parking::montecarlo::{gw_parking_mc, McConfig, DEFAULT_SIZE_CAP};
use fpt::WeightSequence;
use rug::{Float, Rational};
use std::hint::black_box;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn enumeration(c: &mut Criterion) {
    let ws = WeightSequence::polynomial_i64(&[1, 1, 1]);
    let mut g = c.benchmark_group("enumerate_n6");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| enumerate_fnp(black_box(&ws), 6, ITERATION_BUDGET, exec).unwrap())
        });
    }
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let ws = WeightSequence::Polynomial(vec![Rational::from((1, 2)), Rational::new(), Rational::from((1, 2))]);
    let cfg = McConfig { samples: 1 << 18, seed: 42, n_max: 5, p_max: 4, size_cap: DEFAULT_SIZE_CAP };
    let mut g = c.benchmark_group("gw_parking_2^18");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| gw_parking_mc(black_box(&ws), &cfg, exec).unwrap())
        });
    }
    g.finish();
}

fn homogeneous_grid(c: &mut Criterion) {
    let alpha = Float::with_val(128, 2.5);
    let mut g = c.benchmark_group("sandwich_1000");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| sandwich(black_box(&alpha), 40, 25, 0.1, 10.0, exec))
        });
    }
    g.finish();
}

criterion_group!(benches, enumeration, monte_carlo, homogeneous_grid);
criterion_main!(benches);
