use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rademacher_walk::sequences::StepSequence;
use rademacher_walk::verify::verify_supermartingale;
use rademacher_walk::walk::{monte_carlo_return, MonteCarloConfig};
use rademacher_walk::{Execution, Rational};

const MODES: [Execution; 2] = [Execution::Sequential, Execution::Parallel];

fn mc_return(c: &mut Criterion) {
    let seq = StepSequence::floor_power(Rational::new(1, 2)).unwrap();
    let mut group = c.benchmark_group("mc_return");
    group.sample_size(10);
    for mode in MODES {
        let cfg = MonteCarloConfig::new(4000, 7).with_execution(mode);
        group.bench_with_input(BenchmarkId::new(format!("{mode:?}"), 2000), &cfg, |b, cfg| {
            b.iter(|| monte_carlo_return(black_box(&seq), 2000, (0, 0), cfg).unwrap())
        });
    }
    group.finish();
}

fn supermartingale(c: &mut Criterion) {
    let mut group = c.benchmark_group("supermartingale");
    group.sample_size(10);
    for mode in MODES {
        group.bench_with_input(BenchmarkId::new(format!("{mode:?}"), 200), &mode, |b, &mode| {
            b.iter(|| verify_supermartingale(black_box(200), mode).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, mc_return, supermartingale);
criterion_main!(benches);
