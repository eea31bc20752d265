//! Replica loops on the rayon pool against a plain sequential loop. Build with
//! `--no-default-features` to time the library's sequential fallback instead.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use planar_gravity::boundary::{simulate_replica, simulate_replicas, GrowthConfig};
use planar_gravity::exec;
use planar_gravity::nonlinear::{criticality_scan, default_scan_grid};
use planar_gravity::trees::sample_uniform_batch;

fn replicas(c: &mut Criterion) {
    let cfg = GrowthConfig::new(1.0, 2.0, 20_000, 1);
    let n = 16;
    let mut g = c.benchmark_group("boundary_replicas");
    g.sample_size(10);
    g.bench_function("sequential_loop", |b| {
        b.iter(|| (0..n as u64).map(|r| simulate_replica(&cfg, r).unwrap().events).sum::<u64>())
    });
    g.bench_function(BenchmarkId::new("exec", if exec::is_parallel() { "rayon" } else { "fallback" }), |b| {
        b.iter(|| simulate_replicas(&cfg, n).unwrap().events)
    });
    #[cfg(feature = "parallel")]
    {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        g.bench_function("rayon_one_thread", |b| b.iter(|| one.install(|| simulate_replicas(&cfg, n).unwrap().events)));
    }
    g.finish();
}

fn scan(c: &mut Criterion) {
    let grid = default_scan_grid(6);
    let mut g = c.benchmark_group("criticality_scan");
    g.sample_size(10);
    g.bench_function("exec", |b| b.iter(|| criticality_scan(&grid, 40).unwrap().column_disagreements));
    #[cfg(feature = "parallel")]
    {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        g.bench_function("rayon_one_thread", |b| {
            b.iter(|| one.install(|| criticality_scan(&grid, 40).unwrap().column_disagreements))
        });
    }
    g.finish();
}

fn trees(c: &mut Criterion) {
    let mut g = c.benchmark_group("uniform_trees");
    g.sample_size(10);
    g.bench_function("exec", |b| b.iter(|| sample_uniform_batch(101, 3, 200, 1).unwrap().len()));
    g.finish();
}

criterion_group!(benches, replicas, scan, trees);
criterion_main!(benches);
