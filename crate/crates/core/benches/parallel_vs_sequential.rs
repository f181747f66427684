use boppana::experiments::{run_experiment, ExperimentConfig, Family};
use boppana::generators::planted_bisection;
use boppana::oracle::brute_force_bw_with;
use boppana::par::Execution;
use boppana::solver::SolveOptions;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    for n in [18usize, 22] {
        let g = planted_bisection(n, 0.4, 0.2, 1).unwrap().graph;
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &g, |b, g| b.iter(|| brute_force_bw_with(black_box(g), exec).unwrap()));
        }
    }
    group.finish();
}

fn trial_batch(c: &mut Criterion) {
    let mut group = c.benchmark_group("planted_trials");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = ExperimentConfig {
            family: Family::Planted { n: 96, p: 0.3, q: 0.05 },
            trials: 8,
            base_seed: 0,
            solver: SolveOptions::default(),
            exec,
        };
        group.bench_function(name, |b| b.iter(|| run_experiment(black_box(&cfg)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, oracle, trial_batch);
criterion_main!(benches);
