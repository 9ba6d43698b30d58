//! Parallel kernels against a one-thread pool. Without the `parallel`
//! feature both variants run sequentially.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use ibvp_lab::compat::DataTriple;
use ibvp_lab::grid::LineSamples;
use ibvp_lab::harness::{regularity_sweep_with, SweepConfig};
use ibvp_lab::lifting::lift_rm_plane;
use ibvp_lab::parallel::{num_threads, with_threads};
use ibvp_lab::sobolev::fractional::pair_sums;
use ibvp_lab::solver::{solve_exact, SolveConfig};
use ibvp_lab::system::SystemSpec;

fn variants() -> Vec<(&'static str, usize)> {
    vec![("parallel", num_threads().max(2)), ("sequential", 1)]
}

fn bench_pair_sums(c: &mut Criterion) {
    let mut g = c.benchmark_group("pair_sums");
    let n = 4096;
    let h = 1.0 / n as f64;
    let u: Vec<f64> = (0..=n).map(|i| (i as f64 * h).powf(0.3)).collect();
    for (name, t) in variants() {
        g.bench_with_input(BenchmarkId::new(name, n), &u, |b, u| {
            b.iter(|| with_threads(t, || pair_sums(black_box(u), h)))
        });
    }
    g.finish();
}

fn bench_solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_exact");
    g.sample_size(10);
    let spec = SystemSpec::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]], &[vec![0.0, 1.0]]).unwrap();
    let data = DataTriple::closed(&["exp(-x)", "exp(-x)"], &["exp(-t)"]).unwrap();
    let cfg = SolveConfig::new(512, 512, 2.0, 2.0);
    for (name, t) in variants() {
        g.bench_function(BenchmarkId::new(name, 512), |b| {
            b.iter(|| with_threads(t, || solve_exact(&spec, &data, &cfg).unwrap()))
        });
    }
    g.finish();
}

fn bench_lift(c: &mut Criterion) {
    let mut g = c.benchmark_group("lift_rm");
    g.sample_size(10);
    let line = LineSamples::from_fn(-8.0, 8.0, 1024, |x| (-x * x).exp());
    for (name, t) in variants() {
        g.bench_function(BenchmarkId::new(name, 1024), |b| {
            b.iter(|| with_threads(t, || lift_rm_plane(&line, 1, 2.0, 1.0).unwrap()))
        });
    }
    g.finish();
}

fn bench_sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("regularity_sweep");
    g.sample_size(10);
    let spec = SystemSpec::toy();
    let data = DataTriple::closed(&["eta(x)"], &["0"]).unwrap();
    let cfg = SweepConfig {
        n0: 64,
        slices: 16,
        ..SweepConfig::default()
    };
    for (name, t) in variants() {
        g.bench_function(BenchmarkId::new(name, 64), |b| {
            b.iter(|| with_threads(t, || regularity_sweep_with(&spec, &data, &[0.4, 1.0], 3, &cfg).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, bench_pair_sums, bench_solve, bench_lift, bench_sweep);
criterion_main!(benches);
